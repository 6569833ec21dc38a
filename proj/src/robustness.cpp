#include "biomark/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "biomark/common.hpp"
#include "biomark/correlation.hpp"
#include "biomark/dist.hpp"
#include "biomark/parallel.hpp"
#include "biomark/regression.hpp"
#include "biomark/resample.hpp"
#include "biomark/rng.hpp"
#include "biomark/screening.hpp"

namespace biomark {

using nlohmann::json;

namespace {

struct SplitRows {
    std::vector<std::size_t> train, test;
};

// 70/30 participant-level split stratified by participant-mean-target
// quartile.
SplitRows stratified_split(const Dataset& ds, double train_fraction, std::uint64_t key) {
    const auto participants = ds.unique_participants();
    const auto rows_of = ds.rows_by_participant();

    std::vector<double> level(participants.size());
    for (std::size_t p = 0; p < participants.size(); ++p) {
        double mean = 0.0;
        const auto& rows = rows_of.at(participants[p]);
        for (std::size_t r : rows) mean += ds.target()[r];
        level[p] = mean / double(rows.size());
    }
    std::vector<double> sorted = level;
    std::sort(sorted.begin(), sorted.end());
    const double q1 = sorted[sorted.size() / 4];
    const double q2 = sorted[sorted.size() / 2];
    const double q3 = sorted[(3 * sorted.size()) / 4];
    if (sorted.front() == sorted.back())
        throw DataError("robustness harness: degenerate outcome, fewer than 2 quartile strata");

    std::vector<std::vector<std::size_t>> strata(4);
    for (std::size_t p = 0; p < participants.size(); ++p) {
        const int s = level[p] <= q1 ? 0 : (level[p] <= q2 ? 1 : (level[p] <= q3 ? 2 : 3));
        strata[s].push_back(p);
    }

    SplitRows out;
    for (int s = 0; s < 4; ++s) {
        auto& members = strata[s];
        if (members.empty()) continue;
        Rng rng(key, "stratum", std::to_string(s));
        rng.shuffle(members);
        const std::size_t n_train =
            std::size_t(std::llround(train_fraction * double(members.size())));
        for (std::size_t i = 0; i < members.size(); ++i) {
            const auto& rows = rows_of.at(participants[members[i]]);
            auto& side = i < n_train ? out.train : out.test;
            side.insert(side.end(), rows.begin(), rows.end());
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    if (out.train.empty() || out.test.empty())
        throw DataError("robustness harness: empty split side");
    return out;
}

std::vector<double> gather(const std::vector<double>& v, const std::vector<std::size_t>& rows) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
    return out;
}

struct SideData {
    std::vector<double> target;
    Matrix demographics;
    std::vector<int> subgroup;  // 0/1 level per row
    std::vector<std::vector<double>> features;  // aligned to `names`
};

// Feature vs target spearman sign within each subgroup level; 0 when
// undefined.
void subgroup_signs(const std::vector<double>& values, const std::vector<double>& target,
                    const std::vector<int>& subgroup, int* sign0, int* sign1) {
    for (int level = 0; level < 2; ++level) {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (subgroup[i] != level) continue;
            x.push_back(values[i]);
            y.push_back(target[i]);
        }
        int s = 0;
        if (x.size() >= 3) {
            try {
                s = sign_of(spearman(x, y).estimate);
            } catch (const DataError&) {
                s = 0;
            }
        }
        (level == 0 ? *sign0 : *sign1) = s;
    }
}

bool confounder_survives(const std::vector<double>& values, const std::vector<double>& target,
                         const Matrix& demographics, double alpha) {
    try {
        return partial_spearman(values, target, demographics).p_value < alpha;
    } catch (const DataError&) {
        return false;
    }
}

bool replicates(const std::vector<double>& values, const std::vector<double>& target,
                double alpha) {
    try {
        return spearman(values, target).p_value < alpha;
    } catch (const DataError&) {
        return false;
    }
}

bool subgroup_consistent(const std::vector<double>& values, const std::vector<double>& target,
                         const std::vector<int>& subgroup) {
    int s0 = 0, s1 = 0;
    subgroup_signs(values, target, subgroup, &s0, &s1);
    return s0 != 0 && s0 == s1;
}

// Ridge (all coefficients penalized, standardized predictors, centered
// outcome) fit on train, scored on arbitrary row subsets of test data.
struct HoldoutModel {
    std::vector<double> mean, sd, beta;
    double y_mean = 0.0;
    bool empty = true;

    static HoldoutModel fit(const std::vector<std::vector<double>>& features,
                            const std::vector<double>& y, double penalty) {
        HoldoutModel m;
        m.y_mean = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
        if (features.empty()) return m;
        m.empty = false;
        const std::size_t n = y.size(), p = features.size();
        m.mean.resize(p);
        m.sd.resize(p);
        Matrix Z(n, p);
        for (std::size_t j = 0; j < p; ++j) {
            double mean = std::accumulate(features[j].begin(), features[j].end(), 0.0) /
                          double(n);
            double var = 0.0;
            for (double v : features[j]) var += (v - mean) * (v - mean);
            var = n > 1 ? var / double(n - 1) : 0.0;
            m.mean[j] = mean;
            m.sd[j] = var > 0 ? std::sqrt(var) : 1.0;
            for (std::size_t i = 0; i < n; ++i) Z(i, j) = (features[j][i] - mean) / m.sd[j];
        }
        std::vector<double> yc(n);
        for (std::size_t i = 0; i < n; ++i) yc[i] = y[i] - m.y_mean;
        m.beta = ridge_fit(Z, yc, penalty, 0);
        return m;
    }

    double predict_row(const std::vector<std::vector<double>>& features, std::size_t i) const {
        double out = y_mean;
        for (std::size_t j = 0; j < beta.size(); ++j)
            out += beta[j] * (features[j][i] - mean[j]) / sd[j];
        return out;
    }
};

double r2_on_rows(const HoldoutModel& model, const std::vector<std::vector<double>>& features,
                  const std::vector<double>& y, const std::vector<std::size_t>& rows) {
    double mean = 0.0;
    for (std::size_t r : rows) mean += y[r];
    mean /= double(rows.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t r : rows) {
        const double pred = model.predict_row(features, r);
        ss_res += (y[r] - pred) * (y[r] - pred);
        ss_tot += (y[r] - mean) * (y[r] - mean);
    }
    if (ss_tot <= 0.0) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

}  // namespace

RobustnessReport robustness_harness(const Dataset& ds, const RobustnessConfig& cfg) {
    if (!ds.subgroups().count(cfg.subgroup_column))
        throw DataError("robustness harness: subgroup column absent: " + cfg.subgroup_column);
    const auto& subgroup_raw = ds.subgroups().at(cfg.subgroup_column);
    std::set<std::string> levels(subgroup_raw.begin(), subgroup_raw.end());
    if (levels.size() != 2)
        throw DataError("robustness harness: subgroup column must be binary, found " +
                        std::to_string(levels.size()) + " levels");
    const std::string level1 = *levels.rbegin();
    std::vector<int> subgroup(ds.n_rows());
    for (std::size_t i = 0; i < ds.n_rows(); ++i) subgroup[i] = subgroup_raw[i] == level1;

    const auto names = ds.candidate_names();
    if (names.empty()) throw DataError("robustness harness: no candidate features");
    std::vector<std::vector<double>> demo_cols;
    for (const auto& d : ds.demographic_names()) demo_cols.push_back(ds.demographic(d));
    if (demo_cols.empty())
        throw DataError("robustness harness: demographics required for the confounder check");

    RobustnessReport report;
    report.seeds.resize(cfg.n_seeds);

    parallel_for(std::size_t(cfg.n_seeds), cfg.threads, [&](std::size_t s) {
        const std::uint64_t seed_base = cfg.master_seed + s;
        const auto split =
            stratified_split(ds, cfg.train_fraction, derive_key(seed_base, "robustness.split"));

        // Materialize both sides once per seed.
        auto side_of = [&](const std::vector<std::size_t>& rows) {
            SideData side;
            side.target = gather(ds.target(), rows);
            std::vector<std::vector<double>> dc;
            for (const auto& col : demo_cols) dc.push_back(gather(col, rows));
            side.demographics = Matrix::from_columns(dc);
            side.subgroup.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                side.subgroup[i] = subgroup[rows[i]];
            for (const auto& name : names) side.features.push_back(gather(ds.feature(name), rows));
            return side;
        };
        const SideData train = side_of(split.train);
        const SideData test = side_of(split.test);

        // Train-side checks.
        std::vector<std::size_t> checked;
        for (std::size_t f = 0; f < names.size(); ++f) {
            if (!confounder_survives(train.features[f], train.target, train.demographics,
                                     cfg.alpha))
                continue;
            int s0 = 0, s1 = 0;
            subgroup_signs(train.features[f], train.target, train.subgroup, &s0, &s1);
            const bool opposite = s0 != 0 && s1 != 0 && s0 != s1;
            if (opposite) continue;
            checked.push_back(f);
        }

        // Matched random pruning on an independent stream (seed + 1000).
        std::vector<std::size_t> shuffled(names.size());
        std::iota(shuffled.begin(), shuffled.end(), 0);
        Rng prune_rng(derive_key(seed_base + 1000, "robustness.prune"));
        prune_rng.shuffle(shuffled);
        std::vector<std::size_t> random_set(shuffled.begin(),
                                            shuffled.begin() + long(checked.size()));
        std::sort(random_set.begin(), random_set.end());

        std::vector<std::size_t> baseline(names.size());
        std::iota(baseline.begin(), baseline.end(), 0);

        // Test-side metric block for one feature set.
        auto evaluate = [&](const std::vector<std::size_t>& set,
                            const std::string& tag) {
            ConditionMetrics cm;
            cm.n_features = set.size();

            std::vector<char> conf_ok(set.size()), cons_ok(set.size()), repl_ok(set.size());
            for (std::size_t i = 0; i < set.size(); ++i) {
                const auto& values = test.features[set[i]];
                conf_ok[i] = confounder_survives(values, test.target, test.demographics,
                                                 cfg.alpha);
                cons_ok[i] = subgroup_consistent(values, test.target, test.subgroup);
                repl_ok[i] = replicates(values, test.target, cfg.alpha);
            }
            auto fraction = [&](const std::vector<char>& ok) {
                if (ok.empty()) return 0.0;
                return double(std::count(ok.begin(), ok.end(), char(1))) / double(ok.size());
            };
            cm.confounder_survival.value = fraction(conf_ok);
            cm.subgroup_consistency.value = fraction(cons_ok);
            cm.replication_rate.value = fraction(repl_ok);

            std::vector<std::vector<double>> train_feats, test_feats;
            for (std::size_t f : set) {
                train_feats.push_back(train.features[f]);
                test_feats.push_back(test.features[f]);
            }
            const auto model =
                HoldoutModel::fit(train_feats, train.target, cfg.ridge_penalty);
            std::vector<std::size_t> all_test(test.target.size());
            std::iota(all_test.begin(), all_test.end(), 0);
            cm.holdout_r2.value = r2_on_rows(model, test_feats, test.target, all_test);

            // Bootstrap CIs over test rows; the fraction metrics recompute
            // on the resampled rows, the holdout model stays fixed.
            Rng boot_rng(derive_key(seed_base, "robustness.bootstrap", tag));
            std::vector<double> b_conf, b_cons, b_repl, b_r2;
            const std::size_t nt = test.target.size();
            std::vector<std::size_t> rows(nt);
            for (std::size_t b = 0; b < cfg.bootstrap_iters; ++b) {
                for (auto& r : rows) r = std::size_t(boot_rng.next_below(nt));
                std::vector<double> bt = gather(test.target, rows);
                std::vector<int> bs(nt);
                for (std::size_t i = 0; i < nt; ++i) bs[i] = test.subgroup[rows[i]];
                std::vector<std::vector<double>> bdemo;
                for (std::size_t d = 0; d < demo_cols.size(); ++d) {
                    std::vector<double> col(nt);
                    for (std::size_t i = 0; i < nt; ++i) col[i] = test.demographics(rows[i], d);
                    bdemo.push_back(std::move(col));
                }
                const Matrix bdm = Matrix::from_columns(bdemo);
                std::size_t c1 = 0, c2 = 0, c3 = 0;
                for (std::size_t i = 0; i < set.size(); ++i) {
                    std::vector<double> bv = gather(test.features[set[i]], rows);
                    if (confounder_survives(bv, bt, bdm, cfg.alpha)) ++c1;
                    if (subgroup_consistent(bv, bt, bs)) ++c2;
                    if (replicates(bv, bt, cfg.alpha)) ++c3;
                }
                const double denom = set.empty() ? 1.0 : double(set.size());
                b_conf.push_back(double(c1) / denom);
                b_cons.push_back(double(c2) / denom);
                b_repl.push_back(double(c3) / denom);
                b_r2.push_back(r2_on_rows(model, test_feats, test.target, rows));
            }
            auto ci = [&](MetricCi& m, std::vector<double>& samples) {
                m.ci_low = quantile(samples, 0.025);
                m.ci_high = quantile(samples, 0.975);
            };
            ci(cm.confounder_survival, b_conf);
            ci(cm.subgroup_consistency, b_cons);
            ci(cm.replication_rate, b_repl);
            ci(cm.holdout_r2, b_r2);
            return cm;
        };

        SeedOutcome outcome;
        outcome.seed_index = int(s);
        outcome.baseline = evaluate(baseline, "baseline");
        outcome.checked = evaluate(checked, "checked");
        outcome.random_pruned = evaluate(random_set, "random");
        report.seeds[s] = std::move(outcome);
    });

    // Paired t-tests on per-seed deltas vs baseline, BH across the family.
    const char* metric_names[4] = {"confounder_survival", "subgroup_consistency",
                                   "replication_rate", "holdout_r2"};
    auto metric_of = [](const ConditionMetrics& cm, int m) {
        switch (m) {
            case 0: return cm.confounder_survival.value;
            case 1: return cm.subgroup_consistency.value;
            case 2: return cm.replication_rate.value;
            default: return cm.holdout_r2.value;
        }
    };
    std::vector<double> pvals;
    for (int m = 0; m < 4; ++m) {
        for (int cond = 0; cond < 2; ++cond) {
            DeltaSummary summary;
            summary.metric = metric_names[m];
            summary.condition = cond == 0 ? "checked" : "random_pruned";
            for (const auto& seed : report.seeds) {
                const auto& cm = cond == 0 ? seed.checked : seed.random_pruned;
                summary.per_seed_delta.push_back(metric_of(cm, m) -
                                                 metric_of(seed.baseline, m));
            }
            const double n = double(summary.per_seed_delta.size());
            const double mean =
                std::accumulate(summary.per_seed_delta.begin(), summary.per_seed_delta.end(),
                                0.0) /
                n;
            double var = 0.0;
            for (double d : summary.per_seed_delta) var += (d - mean) * (d - mean);
            var = n > 1 ? var / (n - 1.0) : 0.0;
            summary.mean_delta = mean;
            if (var > 0.0) {
                summary.t_stat = mean / std::sqrt(var / n);
                summary.p_value = t_two_sided_p(summary.t_stat, n - 1.0);
            } else {
                summary.t_stat = 0.0;
                summary.p_value = mean == 0.0 ? 1.0 : 0.0;
            }
            pvals.push_back(summary.p_value);
            report.summaries.push_back(std::move(summary));
        }
    }
    // 4 metrics x 2 conditions x dataset count.
    report.family_size = 4 * 2 * std::max<std::size_t>(1, cfg.family_datasets);
    std::vector<double> family = pvals;
    const std::size_t pad = report.family_size - pvals.size();
    // Absent sibling-dataset tests enter the family as p = 1 so the
    // correction is never anti-conservative about the family size.
    for (std::size_t i = 0; i < pad; ++i) family.push_back(1.0);
    const auto bh = bh_fdr(family, 0.05);
    for (std::size_t i = 0; i < report.summaries.size(); ++i)
        report.summaries[i].q_value = bh.adjusted[i];
    return report;
}

json robustness_report_to_json(const RobustnessReport& report) {
    json j;
    j["family_size"] = report.family_size;
    auto metric_json = [](const MetricCi& m) {
        return json{{"value", m.value}, {"ci_low", m.ci_low}, {"ci_high", m.ci_high}};
    };
    auto condition_json = [&](const ConditionMetrics& cm) {
        return json{{"n_features", cm.n_features},
                    {"confounder_survival", metric_json(cm.confounder_survival)},
                    {"subgroup_consistency", metric_json(cm.subgroup_consistency)},
                    {"replication_rate", metric_json(cm.replication_rate)},
                    {"holdout_r2", metric_json(cm.holdout_r2)}};
    };
    json seeds = json::array();
    for (const auto& s : report.seeds)
        seeds.push_back({{"seed_index", s.seed_index},
                         {"baseline", condition_json(s.baseline)},
                         {"checked", condition_json(s.checked)},
                         {"random_pruned", condition_json(s.random_pruned)}});
    j["seeds"] = seeds;
    json summaries = json::array();
    for (const auto& s : report.summaries)
        summaries.push_back({{"metric", s.metric},
                             {"condition", s.condition},
                             {"mean_delta", s.mean_delta},
                             {"per_seed_delta", s.per_seed_delta},
                             {"t_stat", s.t_stat},
                             {"p_value", s.p_value},
                             {"q_value", s.q_value}});
    j["summaries"] = summaries;
    j["note"] =
        "test-side confounder survival shares its definition with the train-side "
        "confounder check; replication rate and subgroup consistency are the less "
        "circular evidence";
    return j;
}

}  // namespace biomark
