#include "biomark/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "biomark/common.hpp"
#include "biomark/correlation.hpp"
#include "biomark/gates.hpp"
#include "biomark/model_eval.hpp"
#include "biomark/parallel.hpp"
#include "biomark/preprocess.hpp"
#include "biomark/rng.hpp"

namespace biomark {

using nlohmann::json;

namespace {

TaskType task_from_string(const std::string& s) {
    if (s == "classification") return TaskType::classification;
    if (s == "regression") return TaskType::regression;
    throw ConfigError("unknown task type: " + s);
}

std::vector<std::string> string_list(const json& j, const char* key) {
    std::vector<std::string> out;
    if (j.contains(key))
        for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
    return out;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
    RunConfig cfg;
    cfg.input_path = j.value("input", "");
    cfg.out_dir = j.value("out_dir", ".");

    const json roles = j.value("roles", json::object());
    cfg.roles.id_column = roles.value("id", "");
    cfg.roles.target_column = roles.value("target", "");
    cfg.roles.task = task_from_string(roles.value("task", "regression"));
    cfg.roles.demographic_columns = string_list(roles, "demographics");
    cfg.roles.subgroup_columns = string_list(roles, "subgroups");
    cfg.roles.group_column = roles.value("group", "");
    cfg.roles.exclude_columns = string_list(roles, "exclude");
    cfg.roles.feature_columns = string_list(roles, "features");
    const std::string delim = j.value("delimiter", ",");
    if (delim == "\\t" || delim == "tab")
        cfg.roles.delimiter = '\t';
    else if (delim.size() == 1)
        cfg.roles.delimiter = delim[0];
    else
        throw ConfigError("delimiter must be a single character or 'tab'");

    const json leak = j.value("leakage", json::object());
    cfg.leakage.target_name = cfg.roles.target_column;
    cfg.leakage.excluded_proxies = string_list(leak, "proxies");
    cfg.leakage.overlap_threshold = leak.value("overlap_threshold", 0.85);
    cfg.leakage.confirmation_fraction = leak.value("confirmation_fraction", 0.30);
    cfg.leakage.min_confirmation_n = leak.value("min_confirmation_n", std::size_t(20));

    const json screen = j.value("screening", json::object());
    cfg.screening.p_threshold = screen.value("p_threshold", 0.05);
    cfg.screening.effect_threshold = screen.value("effect_threshold", 0.20);
    cfg.screening.fdr_alpha = screen.value("fdr_alpha", 0.05);
    cfg.screening.round_id = screen.value("round_id", std::size_t(0));

    const json battery = j.value("battery", json::object());
    cfg.battery.alpha = battery.value("alpha", 0.05);
    cfg.battery.bootstrap_resamples = battery.value("bootstrap_resamples", std::size_t(1000));
    cfg.battery.permutation_resamples =
        battery.value("permutation_resamples", std::size_t(1000));
    cfg.battery.marginal_effect_bound = battery.value("marginal_effect_bound", 0.10);
    cfg.battery.overlap_threshold = cfg.leakage.overlap_threshold;
    cfg.battery.min_confirmation_n = cfg.leakage.min_confirmation_n;

    cfg.drop_missingness_threshold = j.value("drop_missingness_threshold", 0.70);
    cfg.imputation = j.value("imputation", "median");
    if (cfg.imputation != "median" && cfg.imputation != "knn" && cfg.imputation != "iterative")
        throw ConfigError("imputation must be median, knn or iterative");
    cfg.k_folds = j.value("k_folds", 5);
    cfg.threads = j.value("threads", 1);
    cfg.run_sensitivity = j.value("run_sensitivity", true);
    cfg.firewall_enabled = j.value("firewall_enabled", true);
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.seed_set = true;
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return run_config_from_json(j);
}

json run_config_to_json(const RunConfig& cfg) {
    json j;
    j["input"] = cfg.input_path;
    j["out_dir"] = cfg.out_dir;
    j["roles"] = {{"id", cfg.roles.id_column},
                  {"target", cfg.roles.target_column},
                  {"task", cfg.roles.task == TaskType::classification ? "classification"
                                                                      : "regression"},
                  {"demographics", cfg.roles.demographic_columns},
                  {"subgroups", cfg.roles.subgroup_columns},
                  {"group", cfg.roles.group_column},
                  {"exclude", cfg.roles.exclude_columns},
                  {"features", cfg.roles.feature_columns}};
    j["delimiter"] = std::string(1, cfg.roles.delimiter);
    j["leakage"] = {{"proxies", cfg.leakage.excluded_proxies},
                    {"overlap_threshold", cfg.leakage.overlap_threshold},
                    {"confirmation_fraction", cfg.leakage.confirmation_fraction},
                    {"min_confirmation_n", cfg.leakage.min_confirmation_n}};
    j["screening"] = {{"p_threshold", cfg.screening.p_threshold},
                      {"effect_threshold", cfg.screening.effect_threshold},
                      {"fdr_alpha", cfg.screening.fdr_alpha},
                      {"round_id", cfg.screening.round_id}};
    j["battery"] = {{"alpha", cfg.battery.alpha},
                    {"bootstrap_resamples", cfg.battery.bootstrap_resamples},
                    {"permutation_resamples", cfg.battery.permutation_resamples},
                    {"marginal_effect_bound", cfg.battery.marginal_effect_bound}};
    j["drop_missingness_threshold"] = cfg.drop_missingness_threshold;
    j["imputation"] = cfg.imputation;
    j["k_folds"] = cfg.k_folds;
    j["seed"] = cfg.seed;
    j["run_sensitivity"] = cfg.run_sensitivity;
    j["firewall_enabled"] = cfg.firewall_enabled;
    return j;
}

std::string run_id_of(const RunConfig& cfg) {
    json j = run_config_to_json(cfg);
    j.erase("out_dir");  // output location does not change the computation
    return hex64(mix64(fnv1a64(j.dump()) ^ mix64(cfg.seed)));
}

RunContext make_context(RunConfig cfg) {
    if (!cfg.seed_set) throw ConfigError("seed is mandatory (no wall-clock default)");
    if (cfg.input_path.empty()) throw ConfigError("input path is mandatory");
    RunContext ctx{std::move(cfg), "", {}, {}};
    ctx.run_id = run_id_of(ctx.config);
    ctx.facts.run_id = ctx.run_id;
    ctx.facts.set_text("run.id", ctx.run_id);
    ctx.facts.set_int("run.seed", std::int64_t(ctx.config.seed));
    return ctx;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open output file: " + path);
    out << j.dump(2) << "\n";
}

namespace {

json summary_stats(const std::vector<double>& v) {
    json j;
    if (v.empty()) return j;
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / double(v.size() - 1) : 0.0;
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    j["mean"] = mean;
    j["sd"] = std::sqrt(var);
    j["min"] = sorted.front();
    j["max"] = sorted.back();
    j["q25"] = sorted[sorted.size() / 4];
    j["median"] = sorted[sorted.size() / 2];
    j["q75"] = sorted[(3 * sorted.size()) / 4];
    return j;
}

void profile_into_facts(RunContext& ctx, const Dataset& ds, json& report) {
    auto& facts = ctx.facts;
    facts.set_int("cohort.n_rows", std::int64_t(ds.n_rows()));
    facts.set_int("cohort.n_participants", std::int64_t(ds.unique_participants().size()));
    facts.set_int("cohort.n_features", std::int64_t(ds.n_features()));
    facts.set_int("cohort.n_dropped_missing_target",
                  std::int64_t(ds.n_dropped_missing_target()));
    facts.set_text("cohort.task", ds.task_type() == TaskType::classification
                                      ? "classification"
                                      : "regression");

    double mean_missing = 0.0;
    json features = json::object();
    for (const auto& name : ds.feature_names()) {
        const double frac = ds.meta(name).missing_fraction;
        mean_missing += frac;
        features[name] = {{"missing_fraction", frac},
                          {"kind", ds.meta(name).kind == FeatureKind::excluded ? "excluded"
                                   : ds.meta(name).kind == FeatureKind::composite
                                       ? "composite"
                                       : "raw"}};
    }
    mean_missing = ds.n_features() ? mean_missing / double(ds.n_features()) : 0.0;
    facts.set_real("cohort.mean_missingness", mean_missing);

    const json target_stats = summary_stats(ds.target());
    for (auto it = target_stats.begin(); it != target_stats.end(); ++it)
        facts.set_real("target." + it.key(), it.value().get<double>());

    json demo = json::object();
    for (const auto& name : ds.demographic_names()) demo[name] = summary_stats(ds.demographic(name));

    report["n_rows"] = ds.n_rows();
    report["n_participants"] = ds.unique_participants().size();
    report["n_features"] = ds.n_features();
    report["n_dropped_missing_target"] = ds.n_dropped_missing_target();
    report["mean_missingness"] = mean_missing;
    report["target"] = target_stats;
    report["demographics"] = demo;
    report["features"] = features;
}

Dataset impute_with(const Dataset& ds, const std::string& strategy, ImputeLog* log) {
    if (strategy == "knn") return impute_knn(ds, 5, log);
    if (strategy == "iterative") return impute_iterative(ds, 10, log);
    return impute_median(ds, log);
}

// Feature-subset copy used by the sensitivity analyses.
Dataset select_features(const Dataset& ds, const std::vector<std::string>& names) {
    Dataset out(ds.task_type(), ds.n_rows());
    out.set_target(ds.target());
    out.set_participant_ids(ds.participant_ids());
    if (ds.has_group()) out.set_group(ds.group());
    for (const auto& name : names) {
        FeatureMeta meta = ds.meta(name);
        meta.components.clear();  // component columns may not be in the subset
        out.add_feature(name, ds.feature(name), meta);
    }
    return out;
}

// Pipeline state shared between screen and validate.
struct PreparedData {
    Dataset raw_after_drop;  // missing markers intact (sensitivity input)
    Dataset imputed;         // firewalled, imputed working table
    Split split;
    std::vector<std::string> retained;  // candidates surviving the overlap scan
    json firewall_report;
};

PreparedData prepare(RunContext& ctx, json& report) {
    const RunConfig& cfg = ctx.config;
    Dataset loaded = load_table(cfg.input_path, cfg.roles);
    profile_into_facts(ctx, loaded, report["profile"]);

    auto dropped = drop_high_missingness(loaded, cfg.drop_missingness_threshold);
    ctx.facts.set_int("cohort.n_dropped_high_missingness", std::int64_t(dropped.dropped.size()));
    report["dropped_high_missingness"] = dropped.dropped;
    if (dropped.ds.n_features() == 0) report["empty_candidate_pool"] = true;

    ImputeLog impute_log;
    Dataset imputed = impute_with(dropped.ds, cfg.imputation, &impute_log);
    report["imputation"] = {{"strategy", cfg.imputation}, {"notes", impute_log.notes}};

    auto excl = exclude_target_and_proxies(imputed, cfg.leakage);
    ctx.facts.set_int("firewall.n_excluded_proxies", std::int64_t(excl.excluded.size()));
    json firewall = {{"excluded_proxies", excl.excluded},
                     {"missing_proxies", excl.missing_proxies}};

    Split split = discovery_confirmation_split(excl.ds, cfg.leakage, cfg.seed);
    ctx.facts.set_int("split.n_discovery_rows", std::int64_t(split.discovery.n_rows()));
    ctx.facts.set_int("split.n_confirmation_rows", std::int64_t(split.confirmation.n_rows()));

    std::vector<std::string> retained = split.discovery.candidate_names();
    if (cfg.firewall_enabled) {
        auto scan = construct_overlap_scan(split.discovery, retained, cfg.leakage);
        retained = scan.retained;
        json flagged = json::array();
        for (const auto& f : scan.flagged) {
            flagged.push_back(
                {{"candidate", f.candidate}, {"excluded", f.excluded_variable}, {"rho", f.rho}});
            ctx.facts.set_real("firewall.flagged." + f.candidate + ".rho", f.rho);
            ctx.facts.set_text("firewall.flagged." + f.candidate + ".variable",
                               f.excluded_variable);
        }
        json warn = json::array();
        for (const auto& f : scan.near_threshold)
            warn.push_back(
                {{"candidate", f.candidate}, {"excluded", f.excluded_variable}, {"rho", f.rho}});
        firewall["overlap_flagged"] = flagged;
        firewall["overlap_near_threshold"] = warn;
        ctx.facts.set_int("firewall.n_overlap_flagged", std::int64_t(scan.flagged.size()));
    } else {
        firewall["overlap_flagged"] = json::array();
        firewall["disabled"] = true;
        ctx.facts.set_int("firewall.n_overlap_flagged", 0);
    }
    ctx.facts.set_int("firewall.n_retained", std::int64_t(retained.size()));
    report["firewall"] = firewall;

    PreparedData out{std::move(dropped.ds), std::move(excl.ds), std::move(split),
                     std::move(retained), firewall};
    return out;
}

json screened_to_json(const std::vector<ScreenedCandidate>& screened) {
    json rows = json::array();
    for (const auto& sc : screened) {
        rows.push_back({{"name", sc.name},
                        {"rho", sc.rho},
                        {"raw_p", sc.raw_p},
                        {"adjusted_p", sc.adjusted_p},
                        {"survived", sc.survived},
                        {"reason", sc.reason}});
    }
    return rows;
}

std::vector<ScreenedCandidate> run_screen_stage(RunContext& ctx, const PreparedData& prep,
                                                json& report) {
    const auto screened = screen_round(prep.split.discovery, prep.retained, ctx.config.screening);
    report["screening"] = {{"round_id", ctx.config.screening.round_id},
                           {"candidates", screened_to_json(screened)}};

    std::vector<std::string> survivors;
    for (const auto& sc : screened)
        if (sc.survived) survivors.push_back(sc.name);
    ctx.facts.set_int("screening.n_candidates", std::int64_t(prep.retained.size()));
    ctx.facts.set_int("screening.n_survivors", std::int64_t(survivors.size()));
    ctx.facts.set_int("screening.n_imputation_methods", 3);
    ctx.facts.set_int("screening.round_id", std::int64_t(ctx.config.screening.round_id));

    if (ctx.config.run_sensitivity) {
        const auto thr = threshold_sensitivity(prep.split.discovery, prep.retained,
                                               ctx.config.screening);
        report["threshold_sensitivity"] = {{"both", thr.both},
                                           {"default_only", thr.default_only},
                                           {"lenient_only", thr.lenient_only}};
        ctx.facts.set_int("screening.threshold_stable",
                          std::int64_t(thr.both.size()));

        if (!survivors.empty()) {
            // Sensitivity runs on the raw (still missing-marked) table,
            // discovery rows only, restricted to the survivor columns plus
            // the strongest other candidates as imputation context.
            std::vector<const ScreenedCandidate*> by_effect;
            for (const auto& sc : screened) by_effect.push_back(&sc);
            std::sort(by_effect.begin(), by_effect.end(), [](const auto* a, const auto* b) {
                return std::fabs(a->rho) > std::fabs(b->rho);
            });
            std::vector<std::string> subset = survivors;
            std::set<std::string> in_subset(subset.begin(), subset.end());
            for (const auto* sc : by_effect) {
                if (subset.size() >= std::max<std::size_t>(survivors.size() + 8, 2)) break;
                if (in_subset.insert(sc->name).second) subset.push_back(sc->name);
            }
            std::vector<std::size_t> disc_rows;
            std::set<std::string> disc_ids(prep.split.discovery.participant_ids().begin(),
                                           prep.split.discovery.participant_ids().end());
            for (std::size_t i = 0; i < prep.raw_after_drop.n_rows(); ++i)
                if (disc_ids.count(prep.raw_after_drop.participant_ids()[i]))
                    disc_rows.push_back(i);
            const Dataset raw_disc =
                select_features(prep.raw_after_drop.select_rows(disc_rows), subset);
            const auto imp = imputation_sensitivity(raw_disc, survivors);
            json rows = json::array();
            double worst = 0.0;
            for (const auto& e : imp) {
                worst = std::max(worst, e.max_delta);
                rows.push_back({{"name", e.name},
                                {"rho_median", e.rho_median},
                                {"rho_knn", e.rho_knn},
                                {"rho_iterative", e.rho_iterative},
                                {"max_delta", e.max_delta},
                                {"flagged", e.flagged}});
            }
            report["imputation_sensitivity"] = rows;
            ctx.facts.set_real("screening.max_imputation_delta", worst);
        }
    }
    return screened;
}

}  // namespace

json cmd_profile(RunContext& ctx) {
    json report;
    report["run_id"] = ctx.run_id;
    report["stage"] = "profile";
    Dataset ds = load_table(ctx.config.input_path, ctx.config.roles);
    profile_into_facts(ctx, ds, report["profile"]);
    return report;
}

json cmd_screen(RunContext& ctx) {
    json report;
    report["run_id"] = ctx.run_id;
    report["stage"] = "screen";
    PreparedData prep = prepare(ctx, report);
    run_screen_stage(ctx, prep, report);
    return report;
}

namespace {

json check_to_json(const CheckResult& r) {
    return {{"check_id", r.check_id},
            {"applicable", r.applicable},
            {"passed", r.passed},
            {"statistic", r.statistic},
            {"detail", r.detail}};
}

struct BatteryOutcome {
    std::vector<BatteryRecord> records;      // battery per survivor, in order
    std::vector<std::string> validated;      // names, descending |rho| order
    std::vector<std::string> conditional;
    std::vector<std::string> rejected;
    ClusterMap clusters;                      // over the validated set
};

BatteryOutcome run_battery_stage(RunContext& ctx, const PreparedData& prep,
                                 const std::vector<ScreenedCandidate>& screened,
                                 json& report) {
    const RunConfig& cfg = ctx.config;

    // Survivors in descending |rho| (ties by name): the check-8 processing
    // order, recorded in the report.
    std::vector<const ScreenedCandidate*> survivors;
    for (const auto& sc : screened)
        if (sc.survived) survivors.push_back(&sc);
    std::sort(survivors.begin(), survivors.end(), [](const auto* a, const auto* b) {
        if (std::fabs(a->rho) != std::fabs(b->rho)) return std::fabs(a->rho) > std::fabs(b->rho);
        return a->name < b->name;
    });

    BatteryConfig bat = cfg.battery;
    bat.master_seed = cfg.seed;

    struct Partial {
        CandidateBiomarker candidate;
        std::vector<CheckResult> fixed;  // all checks except 8, in id order
        ResampleSummary boot;
        bool compositional = false;
    };
    std::vector<Partial> partials(survivors.size());

    const Dataset& disc = prep.split.discovery;
    const Dataset& conf = prep.split.confirmation;

    // Phase 1: order-independent checks, parallel across candidates.
    parallel_for(survivors.size(), cfg.threads, [&](std::size_t i) {
        Partial& p = partials[i];
        p.candidate.name = survivors[i]->name;
        p.candidate.task_type = disc.task_type();
        p.candidate.discovery_rho = survivors[i]->rho;
        p.candidate.components = disc.meta(survivors[i]->name).components;

        p.fixed.push_back(check_replication(p.candidate, &conf, bat));
        p.fixed.push_back(check_permutation(p.candidate, disc, bat));
        p.fixed.push_back(check_bootstrap(p.candidate, disc, bat, &p.boot));
        p.fixed.push_back(check_loo_influence(p.candidate, disc, bat));
        p.fixed.push_back(check_subgroup_consistency(p.candidate, disc, bat));
        p.fixed.push_back(check_triangulation(p.candidate, disc, bat));
        p.fixed.push_back(check_construct_validity(p.candidate, disc, bat));
        p.fixed.push_back(check_construct_independence(p.candidate, disc, bat, &p.compositional));
        p.fixed.push_back(check_ci_consistency(p.candidate, p.boot, bat));
        p.fixed.push_back(check_discriminative_power(p.candidate, disc, bat));
    });

    // Phase 2: causal robustness conditions on candidates validated earlier
    // in the order, so it runs sequentially.
    BatteryOutcome outcome;
    std::vector<std::string> prior_validated;
    json battery_rows = json::array();
    for (std::size_t i = 0; i < partials.size(); ++i) {
        Partial& p = partials[i];
        const auto c8 = check_causal_robustness(p.candidate, disc, prior_validated, bat);

        BatteryRecord record;
        record.candidate = p.candidate.name;
        record.compositional_disclosure = p.compositional;
        record.results = {p.fixed[0], p.fixed[1], p.fixed[2], p.fixed[3], p.fixed[4],
                          p.fixed[5], p.fixed[6], c8,         p.fixed[7], p.fixed[8],
                          p.fixed[9]};
        record.verdict =
            assign_verdict(record.results, p.candidate.discovery_rho, bat.marginal_effect_bound);

        switch (record.verdict.status) {
            case VerdictStatus::validated:
                outcome.validated.push_back(p.candidate.name);
                prior_validated.push_back(p.candidate.name);
                break;
            case VerdictStatus::conditional:
                outcome.conditional.push_back(p.candidate.name);
                break;
            case VerdictStatus::rejected:
                outcome.rejected.push_back(p.candidate.name);
                break;
        }

        json row;
        row["name"] = p.candidate.name;
        row["discovery_rho"] = p.candidate.discovery_rho;
        row["verdict"] = verdict_name(record.verdict.status);
        row["pass_count"] = record.verdict.pass_count;
        row["applicable_count"] = record.verdict.applicable_count;
        row["hard_gate_failures"] = record.verdict.hard_gate_failures;
        row["compositional_disclosure"] = record.compositional_disclosure;
        json checks = json::array();
        for (const auto& r : record.results) checks.push_back(check_to_json(r));
        row["checks"] = checks;
        battery_rows.push_back(std::move(row));

        ctx.facts.set_real("candidate." + p.candidate.name + ".rho",
                           p.candidate.discovery_rho);
        ctx.facts.set_text("candidate." + p.candidate.name + ".verdict",
                           verdict_name(record.verdict.status));
        ctx.facts.set_int("candidate." + p.candidate.name + ".pass_count",
                          std::int64_t(record.verdict.pass_count));

        outcome.records.push_back(std::move(record));
    }
    report["battery"] = {{"processing_order", "descending |rho|, ties by name"},
                         {"candidates", battery_rows}};

    // Intra-cluster dedup over the validated set.
    if (!outcome.validated.empty()) {
        std::vector<ClusterInput> inputs;
        for (const auto& name : outcome.validated) {
            double rho = 0.0;
            for (const auto* sc : survivors)
                if (sc->name == name) rho = sc->rho;
            inputs.push_back({name, rho, &disc.feature(name)});
        }
        outcome.clusters = intra_cluster_dedup(inputs, cfg.leakage.overlap_threshold);
        json clusters = json::object();
        for (const auto& rep : outcome.clusters.representatives)
            clusters[rep] = outcome.clusters.satellites.at(rep);
        report["validated_clusters"] = clusters;
    } else {
        report["validated_clusters"] = json::object();
    }

    ctx.facts.set_int("battery.n_checks", 11);
    ctx.facts.set_int("battery.n_candidates", std::int64_t(survivors.size()));
    ctx.facts.set_int("battery.n_validated", std::int64_t(outcome.validated.size()));
    ctx.facts.set_int("battery.n_conditional", std::int64_t(outcome.conditional.size()));
    ctx.facts.set_int("battery.n_rejected", std::int64_t(outcome.rejected.size()));
    ctx.facts.set_int("battery.n_representatives",
                      std::int64_t(outcome.clusters.representatives.size()));
    return outcome;
}

json gate_to_json(const QualityGateReport& g) {
    return {{"gate", gate_name(g.id)},
            {"triggered", g.triggered},
            {"measured_value", std::isfinite(g.measured_value)
                                   ? json(g.measured_value)
                                   : json("inf")},
            {"threshold", g.threshold},
            {"suppressed_artifact", g.suppressed_artifact}};
}

void run_model_and_gates(RunContext& ctx, const PreparedData& prep,
                         const BatteryOutcome& outcome, json& report) {
    const RunConfig& cfg = ctx.config;
    const Dataset& full = prep.imputed;

    const auto& reps = outcome.clusters.representatives;
    const bool has_demo = !full.demographic_names().empty();
    json gates = json::array();

    if (reps.empty() && !has_demo) {
        report["model"] = {{"evaluated", false},
                           {"note", "no validated representatives and no demographics"}};
        ctx.facts.set_int("model.evaluated", 0);
        report["gates"] = gates;
        return;
    }

    const auto folds = stratified_participant_kfold(full, cfg.k_folds, cfg.seed);

    std::vector<std::vector<double>> demo_cols, full_cols;
    std::vector<std::string> col_names;
    for (const auto& name : full.demographic_names()) {
        demo_cols.push_back(full.demographic(name));
        full_cols.push_back(full.demographic(name));
        col_names.push_back("demo:" + name);
    }
    for (const auto& name : reps) {
        full_cols.push_back(full.feature(name));
        col_names.push_back(name);
    }

    const ModelSpec model = full.task_type() == TaskType::classification
                                ? ModelSpec(LogisticSpec{})
                                : ModelSpec(RidgeSpec{{1.0}});

    json model_json;
    model_json["evaluated"] = true;
    model_json["columns"] = col_names;

    const Matrix X_full = Matrix::from_columns(full_cols);
    const auto eval_full = cross_validate(X_full, full.target(), folds.fold_of_row,
                                          cfg.k_folds, model);
    const char* metric = eval_full.metric_kind == MetricKind::auc ? "auc" : "r2";
    model_json[std::string("cv_") + metric] = eval_full.cv_metric;
    model_json[std::string("train_") + metric] = eval_full.train_metric;
    model_json["fold_metrics"] = eval_full.fold_metrics;
    ctx.facts.set_real(std::string("model.cv_") + metric, eval_full.cv_metric);
    ctx.facts.set_real(std::string("model.train_") + metric, eval_full.train_metric);
    ctx.facts.set_int("model.evaluated", 1);

    std::vector<ModelEval> all_evals{eval_full};
    if (has_demo && !reps.empty()) {
        const Matrix X_demo = Matrix::from_columns(demo_cols);
        const auto eval_base = cross_validate(X_demo, full.target(), folds.fold_of_row,
                                              cfg.k_folds, model);
        model_json[std::string("baseline_cv_") + metric] = eval_base.cv_metric;
        model_json[std::string("delta_cv_") + metric] =
            eval_full.cv_metric - eval_base.cv_metric;
        ctx.facts.set_real(std::string("model.baseline_cv_") + metric, eval_base.cv_metric);
        ctx.facts.set_real(std::string("model.delta_cv_") + metric,
                           eval_full.cv_metric - eval_base.cv_metric);
        all_evals.push_back(eval_base);
    }
    report["model"] = model_json;

    // Quality gates.
    QualityGateReport g1;
    if (X_full.cols() >= 2) {
        g1 = gate_multicollinearity(X_full);
    } else {
        g1.id = GateId::multicollinearity;
        g1.measured_value = 1.0;
        g1.threshold = 50.0;
    }
    const auto g2 = gate_performance(eval_full);
    const auto g3 = gate_overfitting(eval_full);
    const auto g4 = gate_ablation(all_evals);

    std::vector<FamilyMember> members;
    for (const auto& name : outcome.validated) {
        double rho = ctx.facts.has("candidate." + name + ".rho")
                         ? ctx.facts.numeric("candidate." + name + ".rho")
                         : 0.0;
        members.push_back({name, "", rho});
    }
    ForestDedupResult g5;
    if (!members.empty()) g5 = gate_forest_dedup(members);
    g5.report.id = GateId::forest_dedup;

    for (const auto& g : {g1, g2, g3, g4, g5.report}) {
        gates.push_back(gate_to_json(g));
        ctx.facts.set_int(std::string("gates.") + gate_name(g.id) + ".triggered",
                          g.triggered ? 1 : 0);
    }
    json plot = json::object();
    plot["kept"] = json::array();
    plot["suppressed"] = json::array();
    for (const auto& m : g5.kept) plot["kept"].push_back(m.name);
    for (const auto& m : g5.suppressed) plot["suppressed"].push_back(m.name);
    report["forest_plot"] = plot;
    report["gates"] = gates;
}

}  // namespace

json cmd_validate(RunContext& ctx) {
    json report;
    report["run_id"] = ctx.run_id;
    report["stage"] = "validate";
    PreparedData prep = prepare(ctx, report);
    const auto screened = run_screen_stage(ctx, prep, report);
    const auto outcome = run_battery_stage(ctx, prep, screened, report);
    run_model_and_gates(ctx, prep, outcome, report);
    report["facts_hash"] = hex64(ctx.facts.content_hash());
    return report;
}

namespace {

std::string resolve_placeholders(const std::string& tmpl, const FactSheet& fs,
                                 std::map<std::string, FactValue>* used) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const auto open = tmpl.find("{{", i);
        if (open == std::string::npos) {
            out += tmpl.substr(i);
            break;
        }
        const auto close = tmpl.find("}}", open);
        if (close == std::string::npos) {
            out += tmpl.substr(i);
            break;
        }
        out += tmpl.substr(i, open - i);
        const std::string key = tmpl.substr(open + 2, close - open - 2);
        const FactValue& v = fs.get(key);
        out += fact_value_text(v);
        if (used) (*used)[key] = v;
        i = close + 2;
    }
    return out;
}

}  // namespace

json cmd_report(RunContext& ctx, bool* consistency_ok) {
    json validate_report = cmd_validate(ctx);
    const FactSheet& fs = ctx.facts;

    std::vector<ReportSection> sections;
    auto add_section = [&](const std::string& name, const std::string& tmpl) {
        ReportSection s;
        s.name = name;
        s.text = resolve_placeholders(tmpl, fs, &s.numbers);
        // The scanner pass exists for externally supplied text; our own
        // templates resolve exactly, so it should find nothing to fix.
        const auto verified =
            verify_numbers(s.text, fs, default_bindings(), name, &ctx.audit);
        s.text = verified.text;
        sections.push_back(std::move(s));
    };

    add_section("cohort",
                "The cohort comprises {{cohort.n_participants}} participants contributing "
                "{{cohort.n_rows}} rows across {{cohort.n_features}} features; "
                "{{cohort.n_dropped_missing_target}} rows lacked a target and were dropped.");
    add_section("screening",
                "Screening evaluated {{screening.n_candidates}} candidates and "
                "{{screening.n_survivors}} survived FDR and effect thresholds; "
                "{{screening.n_imputation_methods}} imputation strategies were compared.");
    add_section("battery",
                "The validation battery ran {{battery.n_checks}} checks over "
                "{{battery.n_candidates}} candidates: {{battery.n_validated}} validated, "
                "{{battery.n_conditional}} conditional, {{battery.n_rejected}} rejected; "
                "{{battery.n_representatives}} independent representatives remain after "
                "construct-overlap dedup.");

    // Model section respects the suppression gates.
    {
        ReportSection s;
        s.name = "model";
        bool suppressed = false;
        std::string notice;
        for (const auto& g : validate_report["gates"]) {
            const std::string gate = g["gate"].get<std::string>();
            if (!g["triggered"].get<bool>()) continue;
            if (gate == "performance" || gate == "overfitting" ||
                gate == "multicollinearity") {
                suppressed = true;
                notice += "[suppressed: " + g["suppressed_artifact"].get<std::string>() +
                          " - " + gate + " gate triggered at value " +
                          (g["measured_value"].is_string()
                               ? g["measured_value"].get<std::string>()
                               : fact_value_text(g["measured_value"].get<double>())) +
                          " vs threshold " + fact_value_text(g["threshold"].get<double>()) +
                          "] ";
            }
        }
        if (suppressed) {
            s.text = notice;
        } else if (fs.has("model.cv_r2")) {
            s.text = resolve_placeholders(
                "Ridge cross-validated R2 reached {{model.cv_r2}} (train {{model.train_r2}}).",
                fs, &s.numbers);
        } else if (fs.has("model.cv_auc")) {
            s.text = resolve_placeholders(
                "Logistic cross-validated AUC reached {{model.cv_auc}} "
                "(train {{model.train_auc}}).",
                fs, &s.numbers);
        } else {
            s.text = "No model was evaluated.";
        }
        sections.push_back(std::move(s));
    }

    const auto consistency = consistency_check(sections, fs);
    if (consistency_ok) *consistency_ok = consistency.pass;

    json doc;
    doc["run_id"] = ctx.run_id;
    doc["stage"] = "report";
    doc["facts_hash"] = hex64(fs.content_hash());
    doc["verified"] = consistency.pass;
    json jsections = json::array();
    for (const auto& s : sections) {
        json numbers = json::object();
        for (const auto& [k, v] : s.numbers) {
            if (std::holds_alternative<std::int64_t>(v))
                numbers[k] = std::get<std::int64_t>(v);
            else if (std::holds_alternative<double>(v))
                numbers[k] = std::get<double>(v);
            else
                numbers[k] = std::get<std::string>(v);
        }
        jsections.push_back({{"name", s.name}, {"text", s.text}, {"numbers", numbers}});
    }
    doc["sections"] = jsections;
    json mismatches = json::array();
    for (const auto& m : consistency.mismatches)
        mismatches.push_back({{"section", m.section},
                              {"key", m.key},
                              {"written", m.written},
                              {"truth", m.truth}});
    doc["consistency_mismatches"] = mismatches;

    json facts = json::object();
    for (const auto& [k, v] : fs.entries()) {
        if (std::holds_alternative<std::int64_t>(v))
            facts[k] = std::get<std::int64_t>(v);
        else if (std::holds_alternative<double>(v))
            facts[k] = std::get<double>(v);
        else
            facts[k] = std::get<std::string>(v);
    }
    doc["fact_sheet"] = facts;
    doc["validate"] = validate_report;
    return doc;
}

CohortSpec cohort_spec_from_json(const json& j) {
    CohortSpec spec;
    if (j.contains("preset")) {
        const std::string preset = j.at("preset").get<std::string>();
        if (preset == "dwb")
            spec = dwb_shape();
        else if (preset == "globem")
            spec = globem_shape();
        else if (preset == "wearme")
            spec = wearme_shape();
        else
            throw ConfigError("unknown preset: " + preset);
    }
    spec.n_participants = j.value("n_participants", spec.n_participants);
    spec.rows_total = j.value("rows_total", spec.rows_total);
    if (j.contains("task")) spec.task = task_from_string(j.at("task").get<std::string>());
    spec.n_noise_features = j.value("n_noise_features", spec.n_noise_features);
    spec.missingness = j.value("missingness", spec.missingness);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("planted")) {
        spec.planted.clear();
        for (const auto& p : j.at("planted")) {
            PlantedEffect e;
            e.name = p.at("name").get<std::string>();
            const std::string kind = p.at("kind").get<std::string>();
            if (kind == "linear_signal")
                e.kind = PlantKind::linear_signal;
            else if (kind == "monotone_tautology")
                e.kind = PlantKind::monotone_tautology;
            else if (kind == "composite")
                e.kind = PlantKind::composite;
            else if (kind == "confounded")
                e.kind = PlantKind::confounded;
            else if (kind == "outlier_driven")
                e.kind = PlantKind::outlier_driven;
            else if (kind == "subgroup_inconsistent")
                e.kind = PlantKind::subgroup_inconsistent;
            else
                throw ConfigError("unknown planted kind: " + kind);
            e.target_rho = p.value("target_rho", 0.0);
            e.component_rho = p.value("component_rho", 0.3);
            e.confounder = p.value("confounder", "conf_demo");
            e.subgroup_axis = p.value("subgroup_axis", false);
            spec.planted.push_back(std::move(e));
        }
    }
    return spec;
}

json manifest_to_json(const Manifest& manifest) {
    json entries = json::array();
    for (const auto& e : manifest.entries) {
        entries.push_back({{"name", e.name},
                           {"kind", plant_kind_name(e.kind)},
                           {"target_rho", e.target_rho},
                           {"achieved_rho", e.achieved_rho},
                           {"components", e.components},
                           {"confounder", e.confounder},
                           {"outlier_participant", e.outlier_participant}});
    }
    return {{"entries", entries}, {"noise_features", manifest.noise_features}};
}

json cmd_synth(const CohortSpec& spec, const std::string& table_path,
               const std::string& manifest_path) {
    auto result = generate(spec);
    write_table(result.ds, table_path);
    const json manifest = manifest_to_json(result.manifest);
    write_json(manifest, manifest_path);
    json summary;
    summary["stage"] = "synth";
    summary["table"] = table_path;
    summary["manifest"] = manifest_path;
    summary["n_rows"] = result.ds.n_rows();
    summary["n_participants"] = result.ds.unique_participants().size();
    summary["n_features"] = result.ds.n_features();
    return summary;
}

}  // namespace biomark
