#pragma once

#include <string>
#include <vector>

#include "biomark/matrix.hpp"

namespace biomark {

struct LsqInfo {
    bool rank_deficient = false;
    std::string note;
};

// Least squares via Householder QR (never normal equations).  Callers prepend
// the intercept column themselves.  Rank-deficient systems fall back to a
// vanishing ridge penalty, which approaches the minimum-norm solution; the
// event is reported through info.
std::vector<double> ols_fit(const Matrix& X, const std::vector<double>& y,
                            LsqInfo* info = nullptr);

// Penalized least squares min ||Xb - y||^2 + penalty * sum_{j>=n_unpenalized} b_j^2,
// solved through the same QR path with sqrt(penalty) augmentation rows.
// penalty = 0 reduces to ols_fit.
std::vector<double> ridge_fit(const Matrix& X, const std::vector<double>& y, double penalty,
                              std::size_t n_unpenalized = 0, LsqInfo* info = nullptr);

// Variance inflation factor per column: 1 / (1 - R^2_j) from regressing
// column j on all others plus an intercept.  R^2 within 1e-12 of 1 is
// reported as +infinity.  Throws DataError naming any constant column.
std::vector<double> vif(const Matrix& X);

struct LogisticFit {
    std::vector<double> beta;
    int iterations = 0;
    bool converged = false;
};

// Ridge-penalized logistic regression by iteratively reweighted least
// squares.  X carries the intercept as its first column (unpenalized);
// y must be 0/1.
LogisticFit logistic_fit(const Matrix& X, const std::vector<double>& y, double penalty,
                         int max_iter = 100, double tol = 1e-8);

std::vector<double> logistic_predict(const Matrix& X, const std::vector<double>& beta);

}  // namespace biomark
