#include "biomark/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "biomark/common.hpp"
#include "biomark/correlation.hpp"
#include "biomark/preprocess.hpp"

namespace biomark {

BhResult bh_fdr(const std::vector<double>& p_values, double alpha) {
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("bh_fdr: p-value outside [0,1]");
    const std::size_t m = p_values.size();
    BhResult out;
    out.adjusted.resize(m);
    out.rejected.resize(m);
    if (m == 0) return out;

    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const double stepped = p_values[idx[r]] * double(m) / double(r + 1);
        running = std::min(running, stepped);
        out.adjusted[idx[r]] = std::min(running, 1.0);
    }
    for (std::size_t i = 0; i < m; ++i) out.rejected[i] = out.adjusted[i] <= alpha;
    return out;
}

namespace {

// Rows where the candidate is observed (target carries no missing values).
bool pairwise_complete(const Dataset& ds, const std::string& name, std::vector<double>& x,
                       std::vector<double>& y) {
    const auto& col = ds.feature(name);
    const auto& t = ds.target();
    x.clear();
    y.clear();
    for (std::size_t i = 0; i < col.size(); ++i) {
        if (is_missing(col[i])) continue;
        x.push_back(col[i]);
        y.push_back(t[i]);
    }
    return x.size() >= 3;
}

bool near_constant(const std::vector<double>& v) {
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return var / double(v.size()) < 1e-12;
}

}  // namespace

std::vector<ScreenedCandidate> screen_round(const Dataset& ds,
                                            const std::vector<std::string>& candidates,
                                            const ScreeningConfig& cfg) {
    std::vector<ScreenedCandidate> out;
    out.reserve(candidates.size());

    std::vector<std::size_t> testable;  // indices into `out` that enter the BH family
    std::vector<double> family_p;
    std::vector<double> x, y;
    for (const auto& name : candidates) {
        if (!ds.has_feature(name)) throw DataError("screen_round: unknown candidate " + name);
        if (ds.meta(name).kind == FeatureKind::excluded)
            throw DataError("screen_round: excluded feature offered as candidate: " + name);

        ScreenedCandidate sc;
        sc.name = name;
        sc.round_id = cfg.round_id;
        if (!pairwise_complete(ds, name, x, y)) {
            sc.reason = "fewer_than_3_observed_rows";
        } else if (near_constant(x)) {
            sc.reason = "constant_feature";
        } else if (near_constant(y)) {
            sc.reason = "constant_target_on_observed_rows";
        } else {
            const auto r = spearman(x, y);
            sc.rho = r.estimate;
            sc.raw_p = r.p_value;
            testable.push_back(out.size());
            family_p.push_back(r.p_value);
        }
        out.push_back(std::move(sc));
    }

    const auto bh = bh_fdr(family_p, cfg.fdr_alpha);
    for (std::size_t k = 0; k < testable.size(); ++k) {
        auto& sc = out[testable[k]];
        sc.adjusted_p = bh.adjusted[k];
        sc.survived = bh.rejected[k] && sc.raw_p < cfg.p_threshold &&
                      std::fabs(sc.rho) >= cfg.effect_threshold;
    }
    return out;
}

ThresholdSensitivityReport threshold_sensitivity(const Dataset& ds,
                                                 const std::vector<std::string>& candidates,
                                                 ScreeningConfig default_cfg) {
    ScreeningConfig lenient = default_cfg;
    lenient.p_threshold = 0.10;
    lenient.effect_threshold = 0.10;

    std::set<std::string> def, len;
    for (const auto& sc : screen_round(ds, candidates, default_cfg))
        if (sc.survived) def.insert(sc.name);
    for (const auto& sc : screen_round(ds, candidates, lenient))
        if (sc.survived) len.insert(sc.name);

    ThresholdSensitivityReport report;
    for (const auto& n : def)
        (len.count(n) ? report.both : report.default_only).push_back(n);
    for (const auto& n : len)
        if (!def.count(n)) report.lenient_only.push_back(n);
    return report;
}

std::vector<ImputationSensitivityEntry> imputation_sensitivity(
    const Dataset& ds, const std::vector<std::string>& candidates, double stability_bound) {
    const Dataset med = impute_median(ds);
    const Dataset knn = impute_knn(ds);
    const Dataset iter = impute_iterative(ds);

    std::vector<ImputationSensitivityEntry> out;
    for (const auto& name : candidates) {
        ImputationSensitivityEntry e;
        e.name = name;
        auto rho_on = [&](const Dataset& d) {
            return spearman(d.feature(name), d.target()).estimate;
        };
        e.rho_median = rho_on(med);
        e.rho_knn = rho_on(knn);
        e.rho_iterative = rho_on(iter);
        e.max_delta = std::max({std::fabs(e.rho_median - e.rho_knn),
                                std::fabs(e.rho_median - e.rho_iterative),
                                std::fabs(e.rho_knn - e.rho_iterative)});
        e.flagged = e.max_delta > stability_bound;
        out.push_back(std::move(e));
    }
    // Most unstable first.
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.max_delta > b.max_delta; });
    return out;
}

}  // namespace biomark
