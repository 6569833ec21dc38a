#pragma once

#include <string>
#include <vector>

#include "biomark/dataset.hpp"

namespace biomark {

struct ScreeningConfig {
    double p_threshold = 0.05;
    double effect_threshold = 0.20;
    double fdr_alpha = 0.05;
    std::size_t round_id = 0;
};

struct ScreenedCandidate {
    std::string name;
    double rho = 0.0;
    double raw_p = 1.0;
    double adjusted_p = 1.0;
    bool survived = false;
    std::size_t round_id = 0;
    std::string reason;  // set when screening could not test the feature
};

struct BhResult {
    std::vector<double> adjusted;
    std::vector<bool> rejected;
};

// Benjamini-Hochberg step-up: adjusted_(i) = min_{j>=i} m p_(j) / j, capped
// at 1, restored to input order; rejected iff adjusted <= alpha.
BhResult bh_fdr(const std::vector<double>& p_values, double alpha = 0.05);

// Spearman of every candidate against the target over the rows where the
// candidate is observed, BH across exactly this round's family.  Survival
// requires adjusted p <= fdr_alpha, raw p < p_threshold and |rho| >=
// effect_threshold.  Constant features fail with a reason instead of
// aborting the round.
std::vector<ScreenedCandidate> screen_round(const Dataset& ds,
                                            const std::vector<std::string>& candidates,
                                            const ScreeningConfig& cfg);

struct ThresholdSensitivityReport {
    std::vector<std::string> both;
    std::vector<std::string> default_only;
    std::vector<std::string> lenient_only;
};

// Default (p<.05, |rho|>=.20) vs lenient (p<.10, |rho|>=.10) survivor sets.
ThresholdSensitivityReport threshold_sensitivity(const Dataset& ds,
                                                 const std::vector<std::string>& candidates,
                                                 ScreeningConfig default_cfg = {});

struct ImputationSensitivityEntry {
    std::string name;
    double rho_median = 0.0, rho_knn = 0.0, rho_iterative = 0.0;
    double max_delta = 0.0;
    bool flagged = false;
};

// Recomputes each candidate's Spearman under median / KNN / iterative
// imputation of the (still missing-marked) dataset; flags candidates whose
// max pairwise delta exceeds the stability bound.
std::vector<ImputationSensitivityEntry> imputation_sensitivity(
    const Dataset& ds, const std::vector<std::string>& candidates,
    double stability_bound = 0.01);

}  // namespace biomark
