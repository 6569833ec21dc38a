#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "biomark/battery.hpp"
#include "biomark/factsheet.hpp"
#include "biomark/firewall.hpp"
#include "biomark/screening.hpp"
#include "biomark/synth.hpp"
#include "biomark/table_io.hpp"

namespace biomark {

struct RunConfig {
    std::string input_path;
    std::string out_dir = ".";
    ColumnRoleConfig roles;
    LeakageConfig leakage;
    ScreeningConfig screening;
    BatteryConfig battery;
    double drop_missingness_threshold = 0.70;
    std::string imputation = "median";  // median | knn | iterative
    int k_folds = 5;
    std::uint64_t seed = 0;
    bool seed_set = false;  // the seed is mandatory; no wall-clock default
    int threads = 1;
    bool run_sensitivity = true;
    bool firewall_enabled = true;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);

// Deterministic run identifier: hash of the serialized config and seed.
std::string run_id_of(const RunConfig& cfg);

// Shared mutable state threaded through the stages of one run.
struct RunContext {
    RunConfig config;
    std::string run_id;
    FactSheet facts;
    AuditLog audit;
};

RunContext make_context(RunConfig cfg);

// Stage drivers.  Each returns the stage's machine-readable report and
// deposits its reportable numbers in the fact sheet.
nlohmann::json cmd_profile(RunContext& ctx);
nlohmann::json cmd_screen(RunContext& ctx);
nlohmann::json cmd_validate(RunContext& ctx);
nlohmann::json cmd_report(RunContext& ctx, bool* consistency_ok);
nlohmann::json cmd_synth(const CohortSpec& spec, const std::string& table_path,
                         const std::string& manifest_path);

nlohmann::json manifest_to_json(const Manifest& manifest);
CohortSpec cohort_spec_from_json(const nlohmann::json& j);

// Serializes a json document to disk with a trailing newline.
void write_json(const nlohmann::json& j, const std::string& path);

}  // namespace biomark
