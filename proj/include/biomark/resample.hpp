#pragma once

#include <cstdint>
#include <vector>

#include "biomark/correlation.hpp"

namespace biomark {

struct ResampleSummary {
    double point_estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_resamples = 0;
    std::uint64_t seed = 0;
};

// B paired resamples with replacement; 95% percentile interval.  Degenerate
// resamples (constant column) are redrawn, capped at 5B total attempts.
ResampleSummary bootstrap_ci(const std::vector<double>& x, const std::vector<double>& y,
                             CorrMethod stat, std::size_t n_resamples, std::uint64_t seed);

// Two-sided permutation p with add-one smoothing:
// p = (1 + #{|stat_perm| >= |stat_obs|}) / (B + 1).
double permutation_pvalue(const std::vector<double>& x, const std::vector<double>& y,
                          CorrMethod stat, std::size_t n_permutations, std::uint64_t seed);

// Linear-interpolation quantile of an unsorted sample (type-7).
double quantile(std::vector<double> values, double q);

}  // namespace biomark
