#include "biomark/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biomark/common.hpp"
#include "biomark/dist.hpp"
#include "biomark/regression.hpp"

namespace biomark {

std::vector<double> rank_with_ties(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw DataError("rank_with_ties: empty vector");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = 0.5 * double(i + j) + 1.0;  // mean of ranks i+1 .. j+1
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

namespace {

double pearson_estimate(const std::vector<double>& x, const std::vector<double>& y,
                        bool* degenerate = nullptr) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    double r = sxy / std::sqrt(sxx * syy);
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return r;
}

CorrelationResult t_approx_result(double r, std::size_t n, CorrMethod method) {
    CorrelationResult res;
    res.estimate = r;
    res.n = n;
    res.method = method;
    const double df = double(n) - 2.0;
    if (std::fabs(r) >= 1.0) {
        res.p_value = 0.0;
    } else {
        const double t = r * std::sqrt(df / (1.0 - r * r));
        res.p_value = t_two_sided_p(t, df);
    }
    return res;
}

void check_corr_inputs(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DataError("correlation: length mismatch");
    if (x.size() < 3) throw DataError("correlation: needs n >= 3");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (is_missing(x[i]) || is_missing(y[i]))
            throw DataError("correlation: missing values present");
}

}  // namespace

CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    check_corr_inputs(x, y);
    bool degenerate = false;
    const double r = pearson_estimate(x, y, &degenerate);
    if (degenerate) throw DataError("pearson: constant vector, correlation undefined");
    return t_approx_result(r, x.size(), CorrMethod::pearson);
}

CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
    check_corr_inputs(x, y);
    const auto rx = rank_with_ties(x);
    const auto ry = rank_with_ties(y);
    bool degenerate = false;
    const double r = pearson_estimate(rx, ry, &degenerate);
    if (degenerate) throw DataError("spearman: constant vector, correlation undefined");
    return t_approx_result(r, x.size(), CorrMethod::spearman);
}

namespace {

// Concordant-minus-discordant pair statistic; O(n^2) counting.
long long kendall_s(const std::vector<double>& x, const std::vector<double>& y) {
    long long s = 0;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            const double prod = dx * dy;
            if (prod > 0.0)
                ++s;
            else if (prod < 0.0)
                --s;
        }
    return s;
}

// Sum over tie groups of f(t) for a sorted copy of v.
template <typename F>
double tie_sum(const std::vector<double>& v, F f) {
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    double total = 0.0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j = i;
        while (j + 1 < s.size() && s[j + 1] == s[i]) ++j;
        const double t = double(j - i + 1);
        if (t > 1.0) total += f(t);
        i = j + 1;
    }
    return total;
}

}  // namespace

CorrelationResult kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    check_corr_inputs(x, y);
    const std::size_t n = x.size();
    const double n0 = 0.5 * double(n) * double(n - 1);
    const double n1 = tie_sum(x, [](double t) { return 0.5 * t * (t - 1.0); });
    const double n2 = tie_sum(y, [](double t) { return 0.5 * t * (t - 1.0); });
    if (n0 - n1 <= 0.0 || n0 - n2 <= 0.0)
        throw DataError("kendall: constant vector, correlation undefined");

    const long long s = kendall_s(x, y);
    CorrelationResult res;
    res.method = CorrMethod::kendall;
    res.n = n;
    res.estimate = double(s) / std::sqrt((n0 - n1) * (n0 - n2));
    if (res.estimate > 1.0) res.estimate = 1.0;
    if (res.estimate < -1.0) res.estimate = -1.0;

    if (n >= 10) {
        // Tie-corrected normal approximation for var(S).
        const double dn = double(n);
        const double v0 = dn * (dn - 1.0) * (2.0 * dn + 5.0);
        const double vt = tie_sum(x, [](double t) { return t * (t - 1.0) * (2.0 * t + 5.0); });
        const double vu = tie_sum(y, [](double t) { return t * (t - 1.0) * (2.0 * t + 5.0); });
        const double t1 = tie_sum(x, [](double t) { return t * (t - 1.0); });
        const double u1 = tie_sum(y, [](double t) { return t * (t - 1.0); });
        const double t2 = tie_sum(x, [](double t) { return t * (t - 1.0) * (t - 2.0); });
        const double u2 = tie_sum(y, [](double t) { return t * (t - 1.0) * (t - 2.0); });
        double var = (v0 - vt - vu) / 18.0 + t1 * u1 / (2.0 * dn * (dn - 1.0)) +
                     t2 * u2 / (9.0 * dn * (dn - 1.0) * (dn - 2.0));
        if (var <= 0.0) {
            res.p_value = 1.0;
        } else {
            res.p_value = normal_two_sided_p(double(s) / std::sqrt(var));
        }
    } else {
        // Exact: enumerate all permutations of y; the tau-b denominator is
        // invariant under permutation, so comparing |S| suffices.
        std::vector<double> perm = y;
        std::sort(perm.begin(), perm.end());
        const long long s_obs = std::llabs(s);
        long long hits = 0, total = 0;
        do {
            if (std::llabs(kendall_s(x, perm)) >= s_obs) ++hits;
            ++total;
        } while (std::next_permutation(perm.begin(), perm.end()));
        // next_permutation over a sorted multiset visits each distinct
        // arrangement once; ties make that the correct exact null.
        res.p_value = double(hits) / double(total);
    }
    return res;
}

CorrelationResult partial_spearman(const std::vector<double>& x, const std::vector<double>& y,
                                   const Matrix& confounders, std::size_t* dropped_columns) {
    check_corr_inputs(x, y);
    const std::size_t n = x.size();
    if (confounders.cols() > 0 && confounders.rows() != n)
        throw DataError("partial_spearman: confounder row mismatch");

    const auto rx = rank_with_ties(x);
    const auto ry = rank_with_ties(y);

    // All variables enter on the rank scale (textbook partial Spearman);
    // y identical to a confounder then residualizes to exactly zero.
    // Build [intercept | ranked confounders], dropping columns that do not
    // add rank.
    std::vector<std::vector<double>> kept;
    kept.push_back(std::vector<double>(n, 1.0));
    std::size_t dropped = 0;
    for (std::size_t j = 0; j < confounders.cols(); ++j) {
        auto trial = kept;
        trial.push_back(rank_with_ties(confounders.column(j)));
        QrDecomposition qr(Matrix::from_columns(trial));
        if (qr.full_rank())
            kept = std::move(trial);
        else
            ++dropped;
    }
    if (dropped_columns) *dropped_columns = dropped;
    const std::size_t k = kept.size() - 1;

    Matrix design = Matrix::from_columns(kept);
    const auto bx = ols_fit(design, rx);
    const auto by = ols_fit(design, ry);
    const auto fx = design.multiply(bx);
    const auto fy = design.multiply(by);
    std::vector<double> ex(n), ey(n);
    double ss_ex = 0.0, ss_ey = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ex[i] = rx[i] - fx[i];
        ey[i] = ry[i] - fy[i];
        ss_ex += ex[i] * ex[i];
        ss_ey += ey[i] * ey[i];
    }
    // A variable fully explained by the confounders leaves only rounding
    // noise behind; its partial correlation is zero, not noise-over-noise.
    const double rank_ss = double(n) * double(n) * double(n) / 12.0;
    bool degenerate = ss_ex <= rank_ss * 1e-20 || ss_ey <= rank_ss * 1e-20;
    const double r = degenerate ? 0.0 : pearson_estimate(ex, ey, &degenerate);
    CorrelationResult res;
    res.method = CorrMethod::spearman;
    res.n = n;
    res.estimate = degenerate ? 0.0 : r;
    const double df = double(n) - 2.0 - double(k);
    if (df <= 0.0 || degenerate) {
        res.p_value = 1.0;
    } else if (std::fabs(res.estimate) >= 1.0) {
        res.p_value = 0.0;
    } else {
        const double t = res.estimate * std::sqrt(df / (1.0 - res.estimate * res.estimate));
        res.p_value = t_two_sided_p(t, df);
    }
    return res;
}

CorrelationResult correlate(CorrMethod method, const std::vector<double>& x,
                            const std::vector<double>& y) {
    switch (method) {
        case CorrMethod::pearson: return pearson(x, y);
        case CorrMethod::kendall: return kendall_tau_b(x, y);
        case CorrMethod::spearman:
        default: return spearman(x, y);
    }
}

}  // namespace biomark
