#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biomark/dataset.hpp"

namespace biomark {

enum class PlantKind {
    linear_signal,
    monotone_tautology,
    composite,
    confounded,
    outlier_driven,
    subgroup_inconsistent,
};

const char* plant_kind_name(PlantKind k);

struct PlantedEffect {
    std::string name;
    PlantKind kind = PlantKind::linear_signal;
    double target_rho = 0.0;     // desired Spearman vs the target
    double component_rho = 0.3;  // composite kinds: per-component strength
    std::string confounder = "conf_demo";  // confounded kind: demographic name
    // subgroup_inconsistent: false reverses across target halves (battery
    // check 5), true reverses across the binary sex subgroup (the harness's
    // gender-stratified check).
    bool subgroup_axis = false;
};

struct CohortSpec {
    std::size_t n_participants = 100;
    std::size_t rows_total = 0;  // 0: one row per participant
    TaskType task = TaskType::regression;
    std::size_t n_noise_features = 10;
    std::vector<PlantedEffect> planted;
    double missingness = 0.0;  // per-feature MCAR ratio
    std::uint64_t seed = 0;
};

struct ManifestEntry {
    std::string name;
    PlantKind kind;
    double target_rho = 0.0;
    double achieved_rho = 0.0;  // empirical Spearman vs target at generation
    std::vector<std::string> components;
    std::string confounder;
    std::string outlier_participant;
};

// Ground truth for every non-noise feature in the generated table.
struct Manifest {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> noise_features;

    const ManifestEntry* find(const std::string& name) const;
};

struct SynthResult {
    Dataset ds;
    Manifest manifest;
};

// Deterministic generator: identical spec + seed give a bit-identical table.
// Planted effects are calibrated against the realized sample, so achieved
// Spearman lands within ~1e-3 of target (checked much looser downstream).
SynthResult generate(const CohortSpec& spec);

// Cohort-shape presets (participants x features x missingness, repeated
// measures where applicable).
CohortSpec dwb_shape();     // 7497 x 197, 3% missing, single row
CohortSpec globem_shape();  // 704 rows over 497 participants x 5508, 54.6% missing
CohortSpec wearme_shape();  // 1078 x 71, 0.1% missing

}  // namespace biomark
