// biomark — deterministic biomarker screening and validation pipeline.
//
// Subcommands: profile | screen | validate | report | synth | robustness.
// Every run requires an explicit --seed; identical config + seed gives
// byte-identical outputs at any --threads value.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "biomark/common.hpp"
#include "biomark/pipeline.hpp"
#include "biomark/robustness.hpp"
#include "biomark/table_io.hpp"

using namespace biomark;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitConsistency = 4;

struct CommonArgs {
    std::string config_path;
    std::string input;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
    std::string delimiter;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Run configuration file (JSON)");
    cmd->add_option("--input", args.input, "Input table (overrides config)");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Master seed (mandatory)")
        ->each([&args](const std::string&) { args.seed_given = true; });
    cmd->add_option("--threads", args.threads, "Worker threads (results are unaffected)");
    cmd->add_option("--delimiter", args.delimiter, "Field delimiter (single char or 'tab')");
}

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = load_run_config(args.config_path);
    if (!args.input.empty()) cfg.input_path = args.input;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_given) {
        cfg.seed = args.seed;
        cfg.seed_set = true;
    }
    if (args.threads > 0) cfg.threads = args.threads;
    if (!args.delimiter.empty()) {
        if (args.delimiter == "tab" || args.delimiter == "\\t")
            cfg.roles.delimiter = '\t';
        else if (args.delimiter.size() == 1)
            cfg.roles.delimiter = args.delimiter[0];
        else
            throw ConfigError("delimiter must be a single character or 'tab'");
    }
    return cfg;
}

void emit(RunContext& ctx, const json& doc, const std::string& filename) {
    const std::string path = ctx.config.out_dir + "/" + filename;
    write_json(doc, path);
    std::cout << path << "\n";
}

void emit_facts_and_audit(RunContext& ctx) {
    json facts = json::object();
    for (const auto& [k, v] : ctx.facts.entries()) {
        if (std::holds_alternative<std::int64_t>(v))
            facts[k] = std::get<std::int64_t>(v);
        else if (std::holds_alternative<double>(v))
            facts[k] = std::get<double>(v);
        else
            facts[k] = std::get<std::string>(v);
    }
    json doc;
    doc["run_id"] = ctx.run_id;
    doc["entries"] = facts;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  (unsigned long long)ctx.facts.content_hash());
    doc["content_hash"] = hash;
    emit(ctx, doc, "factsheet.json");
    ctx.audit.write(ctx.config.out_dir + "/audit.log");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic biomarker screening and validation"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* profile = app.add_subcommand("profile", "Data profile: sizes, missingness, target");
    add_common(profile, args);
    auto* screen = app.add_subcommand("screen", "Firewall + FDR screening + sensitivity");
    add_common(screen, args);
    auto* validate = app.add_subcommand("validate", "Battery, verdicts, gates, fact sheet");
    add_common(validate, args);
    auto* report = app.add_subcommand("report", "Consistency-checked report + audit log");
    add_common(report, args);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort + manifest");
    std::string spec_path, synth_out = ".";
    std::uint64_t synth_seed = 0;
    bool synth_seed_given = false;
    synth->add_option("--spec", spec_path, "Cohort spec (JSON)");
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--seed", synth_seed, "Generator seed (overrides spec)")
        ->each([&](const std::string&) { synth_seed_given = true; });

    auto* robustness = app.add_subcommand("robustness", "Held-out robustness experiment");
    add_common(robustness, args);
    int rob_seeds = 10;
    std::string rob_subgroup = "sex";
    robustness->add_option("--seeds", rob_seeds, "Number of split seeds");
    robustness->add_option("--subgroup", rob_subgroup, "Binary subgroup column");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            json spec_json = json::object();
            if (!spec_path.empty()) {
                std::ifstream in(spec_path);
                if (!in) throw ConfigError("cannot open spec file: " + spec_path);
                in >> spec_json;
            }
            CohortSpec spec = cohort_spec_from_json(spec_json);
            if (synth_seed_given) spec.seed = synth_seed;
            const auto summary = cmd_synth(spec, synth_out + "/cohort.csv",
                                           synth_out + "/manifest.json");
            write_json(summary, synth_out + "/synth_summary.json");
            std::cout << summary.dump(2) << "\n";
            return kExitOk;
        }

        RunContext ctx = make_context(resolve_config(args));

        if (profile->parsed()) {
            emit(ctx, cmd_profile(ctx), "profile_report.json");
            emit_facts_and_audit(ctx);
            return kExitOk;
        }
        if (screen->parsed()) {
            emit(ctx, cmd_screen(ctx), "screen_report.json");
            emit_facts_and_audit(ctx);
            return kExitOk;
        }
        if (validate->parsed()) {
            emit(ctx, cmd_validate(ctx), "validate_report.json");
            emit_facts_and_audit(ctx);
            return kExitOk;
        }
        if (report->parsed()) {
            bool ok = false;
            emit(ctx, cmd_report(ctx, &ok), "report.json");
            emit_facts_and_audit(ctx);
            if (!ok) {
                std::cerr << "consistency check failed; report marked unverified\n";
                return kExitConsistency;
            }
            return kExitOk;
        }
        if (robustness->parsed()) {
            Dataset ds = load_table(ctx.config.input_path, ctx.config.roles);
            RobustnessConfig rcfg;
            rcfg.n_seeds = rob_seeds;
            rcfg.master_seed = ctx.config.seed;
            rcfg.subgroup_column = rob_subgroup;
            rcfg.threads = ctx.config.threads;
            const auto rep = robustness_harness(ds, rcfg);
            emit(ctx, robustness_report_to_json(rep), "robustness_report.json");
            emit_facts_and_audit(ctx);
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
