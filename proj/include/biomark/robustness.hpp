#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "biomark/dataset.hpp"

namespace biomark {

struct RobustnessConfig {
    int n_seeds = 10;
    double train_fraction = 0.70;
    double ridge_penalty = 1.0;     // holdout model
    std::size_t bootstrap_iters = 100;
    double alpha = 0.05;
    std::uint64_t master_seed = 0;
    std::string subgroup_column = "sex";  // must be binary
    int threads = 1;
    std::size_t family_datasets = 1;  // BH family scales with dataset count
};

struct MetricCi {
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct ConditionMetrics {
    MetricCi confounder_survival;
    MetricCi subgroup_consistency;
    MetricCi replication_rate;
    MetricCi holdout_r2;
    std::size_t n_features = 0;
};

struct SeedOutcome {
    int seed_index = 0;
    ConditionMetrics baseline;       // unpruned feature set
    ConditionMetrics checked;        // confounder + subgroup checks on train
    ConditionMetrics random_pruned;  // matched-count random control
};

struct DeltaSummary {
    std::string metric;
    std::string condition;  // "checked" | "random_pruned"
    std::vector<double> per_seed_delta;
    double mean_delta = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    double q_value = 1.0;
};

struct RobustnessReport {
    std::vector<SeedOutcome> seeds;
    std::vector<DeltaSummary> summaries;  // 4 metrics x 2 conditions
    std::size_t family_size = 8;
};

// Held-out validation of the confounder and subgroup checks: per seed, a
// 70/30 participant split stratified by outcome quartile; checks prune on
// train only; four metrics score each condition on test with bootstrap CIs;
// matched random pruning (independent stream, seed+1000) controls for set
// size; paired t-tests vs baseline, BH across the metric x condition family.
RobustnessReport robustness_harness(const Dataset& ds, const RobustnessConfig& cfg);

nlohmann::json robustness_report_to_json(const RobustnessReport& report);

}  // namespace biomark
