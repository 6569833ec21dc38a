#pragma once

#include <variant>
#include <vector>

#include "biomark/matrix.hpp"

namespace biomark {

// Mann-Whitney AUC: fraction of (positive, negative) pairs where the positive
// scores higher, ties counted 0.5.  Throws on single-class labels.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

enum class MetricKind { r2, auc };

struct ModelEval {
    double train_metric = 0.0;
    double cv_metric = 0.0;
    MetricKind metric_kind = MetricKind::r2;
    std::vector<double> fold_metrics;
};

// Ridge regression over standardized predictors; a grid with more than one
// penalty triggers inner 3-fold selection inside each training split.
struct RidgeSpec {
    std::vector<double> penalty_grid{1.0};
};

// Ridge-penalized logistic regression fit by IRLS.
struct LogisticSpec {
    double penalty = 1.0;
    int max_iter = 100;
    double tol = 1e-8;
};

using ModelSpec = std::variant<RidgeSpec, LogisticSpec>;

// Out-of-fold metric per fold (R^2 for ridge, AUC for logistic), mean as
// cv_metric, full-data refit as train_metric.  Standardization, imputation,
// and hyperparameter choice happen inside each training split only.
ModelEval cross_validate(const Matrix& X, const std::vector<double>& y,
                         const std::vector<int>& fold_of_row, int k, const ModelSpec& model);

// Smallest rho (3 decimals) whose Fisher-z sample-size requirement
// ((z_{1-a/2} + z_power) / atanh(rho))^2 + 3 is satisfied by n.
double min_detectable_rho(std::size_t n, double alpha = 0.05, double power = 0.80);

}  // namespace biomark
