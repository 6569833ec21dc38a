#include "biomark/regression.hpp"

#include <cmath>
#include <limits>

#include "biomark/common.hpp"

namespace biomark {

namespace {

// Augment [X; sqrt(penalty) rows] / [y; 0] for penalized columns.
Matrix augment_rows(const Matrix& X, double penalty, std::size_t n_unpenalized) {
    const std::size_t m = X.rows(), n = X.cols();
    const std::size_t n_pen = n > n_unpenalized ? n - n_unpenalized : 0;
    Matrix aug(m + n_pen, n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = X(i, j);
    const double s = std::sqrt(penalty);
    for (std::size_t k = 0; k < n_pen; ++k) aug(m + k, n_unpenalized + k) = s;
    return aug;
}

std::vector<double> zero_extend(const std::vector<double>& y, std::size_t extra) {
    std::vector<double> out(y);
    out.resize(y.size() + extra, 0.0);
    return out;
}

}  // namespace

std::vector<double> ols_fit(const Matrix& X, const std::vector<double>& y, LsqInfo* info) {
    if (X.rows() < X.cols()) throw DataError("ols_fit: more columns than rows");
    QrDecomposition qr(X);
    if (qr.full_rank()) return qr.solve(y);

    // Vanishing ridge on all columns approximates the minimum-norm solution.
    if (info) {
        info->rank_deficient = true;
        info->note = "rank-deficient design; vanishing-ridge fallback";
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j) scale = std::max(scale, std::fabs(X(i, j)));
    const double eps = (scale > 0.0 ? scale * scale : 1.0) * 1e-12;
    QrDecomposition qr2(augment_rows(X, eps, 0));
    return qr2.solve(zero_extend(y, X.cols()));
}

std::vector<double> ridge_fit(const Matrix& X, const std::vector<double>& y, double penalty,
                              std::size_t n_unpenalized, LsqInfo* info) {
    if (penalty < 0.0) throw DataError("ridge_fit: negative penalty");
    if (penalty == 0.0) return ols_fit(X, y, info);
    const std::size_t n_pen = X.cols() > n_unpenalized ? X.cols() - n_unpenalized : 0;
    Matrix aug = augment_rows(X, penalty, n_unpenalized);
    QrDecomposition qr(aug);
    if (qr.full_rank()) return qr.solve(zero_extend(y, n_pen));
    // Unpenalized block can still be collinear.
    if (info) {
        info->rank_deficient = true;
        info->note = "rank-deficient penalized design; vanishing-ridge fallback";
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j) scale = std::max(scale, std::fabs(X(i, j)));
    const double eps = (scale > 0.0 ? scale * scale : 1.0) * 1e-12;
    QrDecomposition qr2(augment_rows(aug, eps, 0));
    return qr2.solve(zero_extend(y, n_pen + X.cols()));
}

std::vector<double> vif(const Matrix& X) {
    const std::size_t n = X.rows(), p = X.cols();
    if (p < 2) throw DataError("vif: needs at least two columns");

    for (std::size_t j = 0; j < p; ++j) {
        const auto col = X.column(j);
        const double first = col.empty() ? 0.0 : col[0];
        bool constant = true;
        for (double v : col)
            if (v != first) {
                constant = false;
                break;
            }
        if (constant) throw DataError("vif: constant column at index " + std::to_string(j));
    }

    std::vector<double> out(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto yj = X.column(j);
        Matrix design(n, p);  // intercept + the other columns
        for (std::size_t i = 0; i < n; ++i) {
            design(i, 0) = 1.0;
            std::size_t c = 1;
            for (std::size_t k = 0; k < p; ++k) {
                if (k == j) continue;
                design(i, c++) = X(i, k);
            }
        }
        LsqInfo info;
        const auto beta = ols_fit(design, yj, &info);
        const auto fitted = design.multiply(beta);
        double mean = 0.0;
        for (double v : yj) mean += v;
        mean /= double(n);
        double ss_res = 0.0, ss_tot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ss_res += (yj[i] - fitted[i]) * (yj[i] - fitted[i]);
            ss_tot += (yj[i] - mean) * (yj[i] - mean);
        }
        const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
        out[j] = r2 >= 1.0 - 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
    }
    return out;
}

LogisticFit logistic_fit(const Matrix& X, const std::vector<double>& y, double penalty,
                         int max_iter, double tol) {
    const std::size_t m = X.rows(), n = X.cols();
    LogisticFit fit;
    fit.beta.assign(n, 0.0);

    std::vector<double> eta(m), mu(m), w(m), z(m);
    for (int it = 0; it < max_iter; ++it) {
        eta = X.multiply(fit.beta);
        for (std::size_t i = 0; i < m; ++i) {
            double e = eta[i];
            if (e > 30.0) e = 30.0;
            if (e < -30.0) e = -30.0;
            mu[i] = 1.0 / (1.0 + std::exp(-e));
            w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
            z[i] = eta[i] + (y[i] - mu[i]) / w[i];
        }
        // Weighted ridge step: rows scaled by sqrt(w), intercept unpenalized.
        Matrix xw(m, n);
        std::vector<double> zw(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double s = std::sqrt(w[i]);
            for (std::size_t j = 0; j < n; ++j) xw(i, j) = X(i, j) * s;
            zw[i] = z[i] * s;
        }
        auto next = ridge_fit(xw, zw, penalty, 1);
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) delta = std::max(delta, std::fabs(next[j] - fit.beta[j]));
        fit.beta = std::move(next);
        fit.iterations = it + 1;
        if (delta < tol) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

std::vector<double> logistic_predict(const Matrix& X, const std::vector<double>& beta) {
    auto eta = X.multiply(beta);
    for (double& e : eta) {
        if (e > 30.0) e = 30.0;
        if (e < -30.0) e = -30.0;
        e = 1.0 / (1.0 + std::exp(-e));
    }
    return eta;
}

}  // namespace biomark
