#include "biomark/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "biomark/common.hpp"
#include "biomark/regression.hpp"
#include "biomark/rng.hpp"

namespace biomark {

namespace {

double observed_median(const std::vector<double>& col, const std::vector<std::size_t>* rows) {
    std::vector<double> v;
    if (rows) {
        for (std::size_t r : *rows)
            if (!is_missing(col[r])) v.push_back(col[r]);
    } else {
        for (double x : col)
            if (!is_missing(x)) v.push_back(x);
    }
    if (v.empty()) return kMissing;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void note(ImputeLog* log, const std::string& msg) {
    if (log) log->notes.push_back(msg);
}

}  // namespace

DropResult drop_high_missingness(const Dataset& ds, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw DataError("drop_high_missingness: threshold outside (0,1]");
    DropResult out{ds, {}};
    for (const auto& name : ds.feature_names())
        if (ds.meta(name).missing_fraction > threshold) out.dropped.push_back(name);
    for (const auto& name : out.dropped) out.ds.remove_feature(name);
    return out;
}

Dataset impute_median(const Dataset& ds, ImputeLog* log) {
    Dataset out = ds;

    std::map<std::string, std::vector<std::size_t>> groups;
    if (ds.has_group()) {
        for (std::size_t i = 0; i < ds.n_rows(); ++i) groups[ds.group()[i]].push_back(i);
    }

    for (const auto& name : ds.feature_names()) {
        const auto& col = ds.feature(name);
        if (count_missing(col) == 0) continue;
        const double global = observed_median(col, nullptr);
        if (is_missing(global)) throw DataError("impute_median: column all missing: " + name);

        std::vector<double> filled = col;
        if (groups.empty()) {
            for (auto& v : filled)
                if (is_missing(v)) v = global;
        } else {
            for (const auto& [gname, rows] : groups) {
                double med = observed_median(col, &rows);
                if (is_missing(med)) {
                    med = global;
                    note(log, "impute_median: " + name + " all missing in group " + gname +
                                  "; global median used");
                }
                for (std::size_t r : rows)
                    if (is_missing(filled[r])) filled[r] = med;
            }
        }
        out.set_feature_values(name, std::move(filled));
    }
    return out;
}

Dataset impute_knn(const Dataset& ds, std::size_t k, ImputeLog* log) {
    const std::size_t n = ds.n_rows();
    const auto& names = ds.feature_names();
    const std::size_t p = names.size();

    // Column-standardized copies for the distance metric.
    std::vector<const std::vector<double>*> cols(p);
    std::vector<std::vector<double>> z(p);
    std::vector<double> medians(p);
    bool any_missing = false;
    for (std::size_t j = 0; j < p; ++j) {
        cols[j] = &ds.feature(names[j]);
        medians[j] = observed_median(*cols[j], nullptr);
        if (count_missing(*cols[j]) > 0) {
            if (is_missing(medians[j]))
                throw DataError("impute_knn: column all missing: " + names[j]);
            any_missing = true;
        }
        double mean = 0.0;
        std::size_t cnt = 0;
        for (double v : *cols[j])
            if (!is_missing(v)) {
                mean += v;
                ++cnt;
            }
        mean = cnt ? mean / double(cnt) : 0.0;
        double var = 0.0;
        for (double v : *cols[j])
            if (!is_missing(v)) var += (v - mean) * (v - mean);
        var = cnt > 1 ? var / double(cnt - 1) : 0.0;
        const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
        z[j].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            z[j][i] = is_missing((*cols[j])[i]) ? kMissing : ((*cols[j])[i] - mean) / sd;
    }
    if (!any_missing) return ds;

    Dataset out = ds;
    std::vector<std::vector<double>> filled(p);
    for (std::size_t j = 0; j < p; ++j) filled[j] = *cols[j];

    for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::size_t> missing_cols;
        for (std::size_t j = 0; j < p; ++j)
            if (is_missing((*cols[j])[r])) missing_cols.push_back(j);
        if (missing_cols.empty()) continue;

        // Mean squared distance over mutually observed features; one pass
        // per donor row covers every missing column of row r.
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(n - 1);
        for (std::size_t d = 0; d < n; ++d) {
            if (d == r) continue;
            double s = 0.0;
            std::size_t overlap = 0;
            for (std::size_t j = 0; j < p; ++j) {
                if (is_missing(z[j][r]) || is_missing(z[j][d])) continue;
                const double diff = z[j][r] - z[j][d];
                s += diff * diff;
                ++overlap;
            }
            if (overlap == 0) continue;
            dist.emplace_back(std::sqrt(s / double(overlap)), d);
        }
        std::sort(dist.begin(), dist.end());

        for (std::size_t j : missing_cols) {
            double sum = 0.0;
            std::size_t used = 0;
            for (const auto& [dval, drow] : dist) {
                if (is_missing((*cols[j])[drow])) continue;
                sum += (*cols[j])[drow];
                if (++used == k) break;
            }
            if (used == 0) {
                filled[j][r] = medians[j];
                note(log, "impute_knn: no donors for " + names[j] + " row " +
                              std::to_string(r) + "; median fallback");
            } else {
                filled[j][r] = sum / double(used);
            }
        }
    }
    for (std::size_t j = 0; j < p; ++j) out.set_feature_values(names[j], std::move(filled[j]));
    return out;
}

Dataset impute_iterative(const Dataset& ds, std::size_t rounds, ImputeLog* log) {
    const auto& names = ds.feature_names();
    const std::size_t p = names.size();
    if (p < 2) throw DataError("impute_iterative: needs at least 2 features");
    const std::size_t n = ds.n_rows();

    // Which cells were originally missing.
    std::vector<std::vector<std::size_t>> holes(p);
    bool any = false;
    for (std::size_t j = 0; j < p; ++j) {
        const auto& col = ds.feature(names[j]);
        for (std::size_t i = 0; i < n; ++i)
            if (is_missing(col[i])) holes[j].push_back(i);
        any = any || !holes[j].empty();
    }
    if (!any) return ds;

    Dataset work = impute_median(ds, log);
    std::vector<std::vector<double>> cur(p);
    for (std::size_t j = 0; j < p; ++j) cur[j] = work.feature(names[j]);

    // Large tables: regress on the 64 columns most correlated with the
    // incomplete one instead of all others.
    constexpr std::size_t kMaxPredictors = 64;
    std::vector<std::vector<std::size_t>> predictors(p);
    for (std::size_t j = 0; j < p; ++j) {
        if (holes[j].empty()) continue;
        std::vector<std::size_t> others;
        for (std::size_t o = 0; o < p; ++o)
            if (o != j) others.push_back(o);
        if (others.size() > kMaxPredictors) {
            std::vector<std::pair<double, std::size_t>> scored;
            for (std::size_t o : others) {
                double mx = 0, my = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    mx += cur[o][i];
                    my += cur[j][i];
                }
                mx /= double(n);
                my /= double(n);
                double sxy = 0, sxx = 0, syy = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    sxy += (cur[o][i] - mx) * (cur[j][i] - my);
                    sxx += (cur[o][i] - mx) * (cur[o][i] - mx);
                    syy += (cur[j][i] - my) * (cur[j][i] - my);
                }
                const double denom = std::sqrt(sxx * syy);
                scored.emplace_back(denom > 0 ? -std::fabs(sxy / denom) : 0.0, o);
            }
            std::sort(scored.begin(), scored.end());
            others.clear();
            for (std::size_t t = 0; t < kMaxPredictors; ++t) others.push_back(scored[t].second);
            std::sort(others.begin(), others.end());
        }
        predictors[j] = std::move(others);
    }

    for (std::size_t round = 0; round < rounds; ++round) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (holes[j].empty()) continue;
            const auto& preds = predictors[j];
            Matrix X(n, preds.size() + 1);
            for (std::size_t i = 0; i < n; ++i) {
                X(i, 0) = 1.0;
                for (std::size_t c = 0; c < preds.size(); ++c) X(i, c + 1) = cur[preds[c]][i];
            }
            LsqInfo info;
            std::vector<double> beta;
            QrDecomposition qr(X);
            if (qr.full_rank()) {
                beta = qr.solve(cur[j]);
            } else {
                beta = ridge_fit(X, cur[j], 1e-6, 1, &info);
                note(log, "impute_iterative: singular design for " + names[j] +
                              "; ridge fallback (penalty 1e-6)");
            }
            const auto fitted = X.multiply(beta);
            for (std::size_t i : holes[j]) {
                max_change = std::max(max_change, std::fabs(fitted[i] - cur[j][i]));
                cur[j][i] = fitted[i];
            }
        }
        if (max_change < 1e-6) break;
    }

    for (std::size_t j = 0; j < p; ++j) work.set_feature_values(names[j], std::move(cur[j]));
    return work;
}

Dataset dedup_one_per_participant(const Dataset& ds, std::uint64_t seed) {
    if (ds.participant_ids().empty())
        throw DataError("dedup_one_per_participant: participant ids not populated");
    const auto by_pid = ds.rows_by_participant();
    std::vector<std::size_t> picked;
    for (const auto& pid : ds.unique_participants()) {
        const auto& rows = by_pid.at(pid);
        Rng rng(seed, "dedup", pid);
        picked.push_back(rows[rng.next_below(rows.size())]);
    }
    std::sort(picked.begin(), picked.end());
    return ds.select_rows(picked);
}

}  // namespace biomark
