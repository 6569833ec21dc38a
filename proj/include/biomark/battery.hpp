#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biomark/dataset.hpp"
#include "biomark/resample.hpp"

namespace biomark {

struct CandidateBiomarker {
    std::string name;
    TaskType task_type = TaskType::regression;
    double discovery_rho = 0.0;
    std::vector<std::string> components;  // empty if raw
};

struct BatteryConfig {
    double alpha = 0.05;
    std::size_t bootstrap_resamples = 1000;
    std::size_t permutation_resamples = 1000;
    double construct_threshold_large = 0.85;  // N > 30
    double construct_threshold_small = 0.90;  // adaptive small-sample rule
    double overlap_threshold = 0.85;          // proxy rule, check 9
    double compositional_margin = 0.05;       // check 9
    double auc_threshold = 0.55;
    double marginal_effect_bound = 0.10;
    std::size_t min_confirmation_n = 20;
    std::size_t loo_exact_max_participants = 5000;
    std::uint64_t master_seed = 0;
};

struct CheckResult {
    int check_id = 0;
    bool applicable = true;
    bool passed = false;
    double statistic = 0.0;
    std::string detail;
};

enum class VerdictStatus { validated, conditional, rejected };

const char* verdict_name(VerdictStatus s);

struct Verdict {
    VerdictStatus status = VerdictStatus::rejected;
    std::size_t pass_count = 0;
    std::size_t applicable_count = 0;
    std::vector<int> hard_gate_failures;
    std::vector<int> core_failures;
};

struct BatteryRecord {
    std::string candidate;
    std::vector<CheckResult> results;  // always 11, ordered by check id
    Verdict verdict;
    bool compositional_disclosure = false;
};

struct BatteryInput {
    const Dataset* discovery = nullptr;
    const Dataset* confirmation = nullptr;      // nullptr: check 1 inapplicable
    std::vector<std::string> prior_validated;   // candidates validated earlier in the run
};

// Individual checks (exposed for targeted tests).  Any internal error turns
// into passed=false with a diagnostic, never an exception out of run_battery.
CheckResult check_replication(const CandidateBiomarker& c, const Dataset* confirmation,
                              const BatteryConfig& cfg);                          // 1
CheckResult check_permutation(const CandidateBiomarker& c, const Dataset& ds,
                              const BatteryConfig& cfg);                          // 2
CheckResult check_bootstrap(const CandidateBiomarker& c, const Dataset& ds,
                            const BatteryConfig& cfg, ResampleSummary* summary);  // 3
CheckResult check_loo_influence(const CandidateBiomarker& c, const Dataset& ds,
                                const BatteryConfig& cfg);                        // 4
CheckResult check_subgroup_consistency(const CandidateBiomarker& c, const Dataset& ds,
                                       const BatteryConfig& cfg);                 // 5
CheckResult check_triangulation(const CandidateBiomarker& c, const Dataset& ds,
                                const BatteryConfig& cfg);                        // 6
CheckResult check_construct_validity(const CandidateBiomarker& c, const Dataset& ds,
                                     const BatteryConfig& cfg);                   // 7, hard gate
CheckResult check_causal_robustness(const CandidateBiomarker& c, const Dataset& ds,
                                    const std::vector<std::string>& prior_validated,
                                    const BatteryConfig& cfg);                    // 8
CheckResult check_construct_independence(const CandidateBiomarker& c, const Dataset& ds,
                                         const BatteryConfig& cfg,
                                         bool* compositional);                    // 9, hard gate
CheckResult check_ci_consistency(const CandidateBiomarker& c, const ResampleSummary& summary,
                                 const BatteryConfig& cfg);                       // 10, hard gate
CheckResult check_discriminative_power(const CandidateBiomarker& c, const Dataset& ds,
                                       const BatteryConfig& cfg);                 // 11

BatteryRecord run_battery(const CandidateBiomarker& c, const BatteryInput& input,
                          const BatteryConfig& cfg);

// Pure function of (results, rho): hard gates dominate; checks 1-3 failing
// together reject immediately; VALIDATED needs >= 70% of applicable checks
// plus all core checks {1,2,3,10}, downgraded to CONDITIONAL below the
// marginal effect bound; CONDITIONAL needs >= 40%.
Verdict assign_verdict(const std::vector<CheckResult>& results, double rho,
                       double marginal_effect_bound = 0.10);

}  // namespace biomark
