#pragma once

#include <vector>

#include "biomark/matrix.hpp"

namespace biomark {

enum class CorrMethod { spearman, pearson, kendall };

struct CorrelationResult {
    double estimate = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    CorrMethod method = CorrMethod::spearman;
};

// Average ranks for tied values; ranks sum to n(n+1)/2.  Throws on empty input.
std::vector<double> rank_with_ties(const std::vector<double>& x);

// Pearson correlation with two-sided p from t = r sqrt((n-2)/(1-r^2)).
// Throws DataError on constant input or n < 3.
CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y);

// Spearman = Pearson on tie-averaged ranks, same t-approximation p.
CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y);

// Kendall tau-b with tie correction.  p is a normal approximation for
// n >= 10 and an exact permutation enumeration of the pair statistic below.
CorrelationResult kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y);

// Rank-transform x and y, residualize each on [intercept | confounders],
// Pearson of residuals with df = n - 2 - #confounders.  Collinear confounder
// columns are dropped (count reported through dropped_columns).
CorrelationResult partial_spearman(const std::vector<double>& x, const std::vector<double>& y,
                                   const Matrix& confounders,
                                   std::size_t* dropped_columns = nullptr);

CorrelationResult correlate(CorrMethod method, const std::vector<double>& x,
                            const std::vector<double>& y);

}  // namespace biomark
