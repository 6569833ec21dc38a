#include "biomark/resample.hpp"

#include <algorithm>
#include <cmath>

#include "biomark/common.hpp"
#include "biomark/rng.hpp"

namespace biomark {

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("quantile: empty sample");
    std::sort(values.begin(), values.end());
    if (q <= 0.0) return values.front();
    if (q >= 1.0) return values.back();
    const double pos = q * double(values.size() - 1);
    const std::size_t lo = std::size_t(pos);
    const double frac = pos - double(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

namespace {

// Correlation estimate only; flags degenerate (constant) resamples instead
// of throwing.
double stat_estimate(CorrMethod m, const std::vector<double>& x, const std::vector<double>& y,
                     bool* degenerate) {
    *degenerate = false;
    const double x0 = x[0], y0 = y[0];
    bool cx = true, cy = true;
    for (double v : x)
        if (v != x0) {
            cx = false;
            break;
        }
    for (double v : y)
        if (v != y0) {
            cy = false;
            break;
        }
    if (cx || cy) {
        *degenerate = true;
        return 0.0;
    }
    return correlate(m, x, y).estimate;
}

}  // namespace

ResampleSummary bootstrap_ci(const std::vector<double>& x, const std::vector<double>& y,
                             CorrMethod stat, std::size_t n_resamples, std::uint64_t seed) {
    if (x.size() != y.size()) throw DataError("bootstrap_ci: length mismatch");
    if (x.size() < 10) throw DataError("bootstrap_ci: needs n >= 10");
    if (n_resamples < 1) throw DataError("bootstrap_ci: needs B >= 1");

    ResampleSummary out;
    out.seed = seed;
    out.n_resamples = n_resamples;
    out.point_estimate = correlate(stat, x, y).estimate;

    Rng rng(seed);
    const std::size_t n = x.size();
    std::vector<double> xs(n), ys(n), stats;
    stats.reserve(n_resamples);
    std::size_t attempts = 0;
    const std::size_t max_attempts = 5 * n_resamples;
    while (stats.size() < n_resamples) {
        if (++attempts > max_attempts)
            throw DataError("bootstrap_ci: too many degenerate resamples (near-constant input)");
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = std::size_t(rng.next_below(n));
            xs[i] = x[k];
            ys[i] = y[k];
        }
        bool degenerate = false;
        const double s = stat_estimate(stat, xs, ys, &degenerate);
        if (!degenerate) stats.push_back(s);
    }
    out.ci_low = quantile(stats, 0.025);
    out.ci_high = quantile(stats, 0.975);
    return out;
}

double permutation_pvalue(const std::vector<double>& x, const std::vector<double>& y,
                          CorrMethod stat, std::size_t n_permutations, std::uint64_t seed) {
    if (x.size() != y.size()) throw DataError("permutation_pvalue: length mismatch");
    if (x.size() < 3) throw DataError("permutation_pvalue: needs n >= 3");
    if (n_permutations < 1) throw DataError("permutation_pvalue: needs B >= 1");

    const double obs = std::fabs(correlate(stat, x, y).estimate);
    Rng rng(seed);
    std::vector<double> yp = y;
    std::size_t hits = 0;
    for (std::size_t b = 0; b < n_permutations; ++b) {
        rng.shuffle(yp);
        bool degenerate = false;
        const double s = std::fabs(stat_estimate(stat, x, yp, &degenerate));
        // 1e-12 slack so re-encountering the observed arrangement counts.
        if (!degenerate && s >= obs - 1e-12) ++hits;
    }
    return double(1 + hits) / double(n_permutations + 1);
}

}  // namespace biomark
