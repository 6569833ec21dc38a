#include "biomark/battery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "biomark/common.hpp"
#include "biomark/correlation.hpp"
#include "biomark/model_eval.hpp"
#include "biomark/rng.hpp"

namespace biomark {

const char* verdict_name(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::validated: return "VALIDATED";
        case VerdictStatus::conditional: return "CONDITIONAL";
        case VerdictStatus::rejected: return "REJECTED";
    }
    return "?";
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Wraps a check body: any DataError becomes passed=false with the message.
template <typename F>
CheckResult guarded(int id, F&& body) {
    CheckResult res;
    res.check_id = id;
    try {
        body(res);
    } catch (const DataError& e) {
        res.applicable = true;
        res.passed = false;
        res.detail = e.what();
    }
    return res;
}

}  // namespace

CheckResult check_replication(const CandidateBiomarker& c, const Dataset* confirmation,
                              const BatteryConfig& cfg) {
    return guarded(1, [&](CheckResult& res) {
        if (!confirmation || confirmation->n_rows() < cfg.min_confirmation_n) {
            res.applicable = false;
            res.detail = "confirmation set below N >= " + std::to_string(cfg.min_confirmation_n);
            return;
        }
        const auto r = spearman(confirmation->feature(c.name), confirmation->target());
        res.statistic = r.estimate;
        res.passed = r.p_value < cfg.alpha && sign_of(r.estimate) == sign_of(c.discovery_rho);
        res.detail = "confirmation rho=" + fmt(r.estimate) + " p=" + fmt(r.p_value);
    });
}

CheckResult check_permutation(const CandidateBiomarker& c, const Dataset& ds,
                              const BatteryConfig& cfg) {
    return guarded(2, [&](CheckResult& res) {
        const double p =
            permutation_pvalue(ds.feature(c.name), ds.target(), CorrMethod::spearman,
                               cfg.permutation_resamples,
                               derive_key(cfg.master_seed, "battery.permutation", c.name));
        res.statistic = p;
        res.passed = p < cfg.alpha;
        res.detail = "permutation p=" + fmt(p);
    });
}

CheckResult check_bootstrap(const CandidateBiomarker& c, const Dataset& ds,
                            const BatteryConfig& cfg, ResampleSummary* summary) {
    return guarded(3, [&](CheckResult& res) {
        const auto s =
            bootstrap_ci(ds.feature(c.name), ds.target(), CorrMethod::spearman,
                         cfg.bootstrap_resamples,
                         derive_key(cfg.master_seed, "battery.bootstrap", c.name));
        if (summary) *summary = s;
        const bool excludes_zero =
            s.ci_low != 0.0 && s.ci_high != 0.0 && sign_of(s.ci_low) == sign_of(s.ci_high);
        res.statistic = excludes_zero ? (s.ci_low > 0 ? s.ci_low : s.ci_high) : 0.0;
        res.passed = excludes_zero;
        res.detail = "ci=[" + fmt(s.ci_low) + "," + fmt(s.ci_high) + "]";
    });
}

CheckResult check_loo_influence(const CandidateBiomarker& c, const Dataset& ds,
                                const BatteryConfig& cfg) {
    return guarded(4, [&](CheckResult& res) {
        const auto& values = ds.feature(c.name);
        const auto& target = ds.target();
        const double full = spearman(values, target).estimate;
        const int full_sign = sign_of(full);

        const auto participants = ds.unique_participants();
        const auto rows_of = ds.rows_by_participant();

        std::vector<std::string> to_check;
        if (participants.size() <= cfg.loo_exact_max_participants) {
            to_check = participants;
        } else {
            // Exact recomputation restricted to the highest-leverage
            // participants (rank-residual magnitude) plus a seeded random
            // draw; sign flips need extreme leverage.
            const auto rx = rank_with_ties(values);
            const auto ry = rank_with_ties(target);
            const double mean_rank = 0.5 * double(values.size() + 1);
            std::vector<std::pair<double, std::size_t>> lever(participants.size());
            for (std::size_t p = 0; p < participants.size(); ++p) {
                double s = 0.0;
                for (std::size_t r : rows_of.at(participants[p]))
                    s += (rx[r] - mean_rank) * (ry[r] - mean_rank);
                lever[p] = {-std::fabs(s), p};
            }
            std::sort(lever.begin(), lever.end());
            std::set<std::size_t> chosen;
            for (std::size_t i = 0; i < 200 && i < lever.size(); ++i)
                chosen.insert(lever[i].second);
            Rng rng(cfg.master_seed, "battery.loo", c.name);
            while (chosen.size() < std::min<std::size_t>(400, participants.size()))
                chosen.insert(std::size_t(rng.next_below(participants.size())));
            for (std::size_t p : chosen) to_check.push_back(participants[p]);
            res.detail = "loo restricted to " + std::to_string(to_check.size()) +
                         " high-leverage/random participants; ";
        }

        double min_abs = std::fabs(full);
        std::vector<double> x, y;
        x.reserve(values.size());
        y.reserve(values.size());
        for (const auto& pid : to_check) {
            const auto& drop = rows_of.at(pid);
            x.clear();
            y.clear();
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (std::find(drop.begin(), drop.end(), i) != drop.end()) continue;
                x.push_back(values[i]);
                y.push_back(target[i]);
            }
            double rho;
            try {
                rho = spearman(x, y).estimate;
            } catch (const DataError&) {
                res.passed = false;
                res.detail += "degenerate after removing " + pid;
                return;
            }
            min_abs = std::min(min_abs, std::fabs(rho));
            if (sign_of(rho) != full_sign) {
                res.statistic = rho;
                res.passed = false;
                res.detail += "sign flips when excluding " + pid;
                return;
            }
        }
        res.statistic = min_abs;
        res.passed = true;
        res.detail += "no sign flip; min |rho|=" + fmt(min_abs);
    });
}

namespace {

// Spearman sign on a row subset; 0 when undefined.
int half_sign(const std::vector<double>& values, const std::vector<double>& target,
              const std::vector<std::size_t>& rows, double* rho_out) {
    if (rows.size() < 3) return 0;
    std::vector<double> x, y;
    x.reserve(rows.size());
    y.reserve(rows.size());
    for (std::size_t r : rows) {
        x.push_back(values[r]);
        y.push_back(target[r]);
    }
    try {
        const double rho = spearman(x, y).estimate;
        if (rho_out) *rho_out = rho;
        return sign_of(rho);
    } catch (const DataError&) {
        return 0;
    }
}

}  // namespace

CheckResult check_subgroup_consistency(const CandidateBiomarker& c, const Dataset& ds,
                                       const BatteryConfig& cfg) {
    (void)cfg;
    return guarded(5, [&](CheckResult& res) {
        const auto& values = ds.feature(c.name);
        const auto& target = ds.target();
        const std::size_t n = ds.n_rows();
        // Sign coherence: every sign-dependent check compares against the
        // same stored discovery sign.
        const int full_sign = sign_of(c.discovery_rho);

        // Halving variable: target median for regression; the candidate's
        // own median for classification, where the class split would leave
        // no target variation inside a half.
        const std::vector<double>& splitter =
            c.task_type == TaskType::classification ? values : target;
        std::vector<double> sorted = splitter;
        std::sort(sorted.begin(), sorted.end());
        const double med = sorted[n / 2];

        std::vector<std::size_t> lower, upper;
        for (std::size_t i = 0; i < n; ++i)
            (splitter[i] > med ? upper : lower).push_back(i);

        double rho_lo = 0.0, rho_hi = 0.0;
        const int s_lo = half_sign(values, target, lower, &rho_lo);
        const int s_hi = half_sign(values, target, upper, &rho_hi);
        if (s_lo == 0 || s_hi == 0) {
            res.passed = false;
            res.detail = "degenerate half (too small or constant)";
            return;
        }
        res.statistic = std::fabs(rho_lo) < std::fabs(rho_hi) ? rho_lo : rho_hi;
        res.passed = s_lo == full_sign && s_hi == full_sign;
        res.detail = "halves rho=" + fmt(rho_lo) + "/" + fmt(rho_hi) +
                     " vs full sign " + std::to_string(full_sign);
    });
}

CheckResult check_triangulation(const CandidateBiomarker& c, const Dataset& ds,
                                const BatteryConfig& cfg) {
    return guarded(6, [&](CheckResult& res) {
        const auto& values = ds.feature(c.name);
        const auto& target = ds.target();
        const auto pe = pearson(values, target);
        const auto kd = kendall_tau_b(values, target);
        const int want = sign_of(c.discovery_rho);
        res.statistic = std::max(pe.p_value, kd.p_value);
        res.passed = pe.p_value < cfg.alpha && kd.p_value < cfg.alpha &&
                     sign_of(pe.estimate) == want && sign_of(kd.estimate) == want;
        res.detail = "pearson r=" + fmt(pe.estimate) + " p=" + fmt(pe.p_value) +
                     "; kendall tau=" + fmt(kd.estimate) + " p=" + fmt(kd.p_value);
    });
}

CheckResult check_construct_validity(const CandidateBiomarker& c, const Dataset& ds,
                                     const BatteryConfig& cfg) {
    return guarded(7, [&](CheckResult& res) {
        const auto r = spearman(ds.feature(c.name), ds.target());
        const double threshold = ds.n_rows() > 30 ? cfg.construct_threshold_large
                                                  : cfg.construct_threshold_small;
        res.statistic = std::fabs(r.estimate);
        res.passed = !(std::fabs(r.estimate) > threshold);
        res.detail = "|rho|=" + fmt(std::fabs(r.estimate)) + " vs threshold " + fmt(threshold);
    });
}

CheckResult check_causal_robustness(const CandidateBiomarker& c, const Dataset& ds,
                                    const std::vector<std::string>& prior_validated,
                                    const BatteryConfig& cfg) {
    return guarded(8, [&](CheckResult& res) {
        std::vector<std::vector<double>> confounders;
        for (const auto& name : ds.demographic_names())
            confounders.push_back(ds.demographic(name));
        for (const auto& name : prior_validated) {
            if (name == c.name) continue;
            confounders.push_back(ds.feature(name));
        }
        if (confounders.empty()) {
            res.applicable = false;
            res.detail = "no confounders available";
            return;
        }
        const auto r = partial_spearman(ds.feature(c.name), ds.target(),
                                        Matrix::from_columns(confounders));
        res.statistic = r.estimate;
        res.passed = r.p_value < cfg.alpha && sign_of(r.estimate) == sign_of(c.discovery_rho);
        res.detail = "partial rho=" + fmt(r.estimate) + " p=" + fmt(r.p_value) + " (" +
                     std::to_string(confounders.size()) + " confounders)";
    });
}

CheckResult check_construct_independence(const CandidateBiomarker& c, const Dataset& ds,
                                         const BatteryConfig& cfg, bool* compositional) {
    if (compositional) *compositional = false;
    return guarded(9, [&](CheckResult& res) {
        const double cand_rho = std::fabs(spearman(ds.feature(c.name), ds.target()).estimate);
        double max_comp = 0.0;
        for (const auto& comp : c.components) {
            const double r = std::fabs(spearman(ds.feature(comp), ds.target()).estimate);
            max_comp = std::max(max_comp, r);
        }
        res.statistic = std::max(cand_rho, max_comp);

        if (cand_rho > cfg.overlap_threshold || max_comp > cfg.overlap_threshold) {
            res.passed = false;
            res.detail = "proxy: |rho|=" + fmt(cand_rho) +
                         ", max component |rho|=" + fmt(max_comp);
        } else if (!c.components.empty() && max_comp >= cand_rho - cfg.compositional_margin) {
            res.passed = true;
            if (compositional) *compositional = true;
            res.detail = "compositional: disclosure required (max component |rho|=" +
                         fmt(max_comp) + " vs candidate " + fmt(cand_rho) + ")";
        } else {
            res.passed = true;
            res.detail = "independent";
        }
    });
}

CheckResult check_ci_consistency(const CandidateBiomarker& c, const ResampleSummary& summary,
                                 const BatteryConfig& cfg) {
    (void)cfg;
    return guarded(10, [&](CheckResult& res) {
        const double mid = 0.5 * (summary.ci_low + summary.ci_high);
        res.statistic = mid;
        const int rho_sign = sign_of(summary.point_estimate);
        const int mid_sign = sign_of(mid);
        res.passed = rho_sign != 0 && mid_sign != 0 && rho_sign == mid_sign;
        res.detail = "rho=" + fmt(summary.point_estimate) + " ci midpoint=" + fmt(mid);
    });
}

CheckResult check_discriminative_power(const CandidateBiomarker& c, const Dataset& ds,
                                       const BatteryConfig& cfg) {
    return guarded(11, [&](CheckResult& res) {
        const auto& values = ds.feature(c.name);
        const auto& target = ds.target();
        std::vector<int> labels(target.size());
        if (c.task_type == TaskType::classification) {
            std::set<double> distinct(target.begin(), target.end());
            if (distinct.size() != 2) throw DataError("classification target not binary");
            const double hi = *distinct.rbegin();
            for (std::size_t i = 0; i < target.size(); ++i) labels[i] = target[i] == hi;
        } else {
            std::vector<double> sorted = target;
            std::sort(sorted.begin(), sorted.end());
            const double med = sorted[target.size() / 2];
            for (std::size_t i = 0; i < target.size(); ++i) labels[i] = target[i] > med;
        }
        const double a = auc(values, labels);
        const double oriented = std::max(a, 1.0 - a);
        res.statistic = oriented;
        res.passed = oriented >= cfg.auc_threshold;
        res.detail = "oriented AUC=" + fmt(oriented);
    });
}

BatteryRecord run_battery(const CandidateBiomarker& c, const BatteryInput& input,
                          const BatteryConfig& cfg) {
    if (!input.discovery) throw DataError("run_battery: discovery dataset required");
    const Dataset& ds = *input.discovery;

    BatteryRecord record;
    record.candidate = c.name;

    ResampleSummary boot;
    record.results.push_back(check_replication(c, input.confirmation, cfg));
    record.results.push_back(check_permutation(c, ds, cfg));
    record.results.push_back(check_bootstrap(c, ds, cfg, &boot));
    record.results.push_back(check_loo_influence(c, ds, cfg));
    record.results.push_back(check_subgroup_consistency(c, ds, cfg));
    record.results.push_back(check_triangulation(c, ds, cfg));
    record.results.push_back(check_construct_validity(c, ds, cfg));
    record.results.push_back(check_causal_robustness(c, ds, input.prior_validated, cfg));
    bool compositional = false;
    record.results.push_back(check_construct_independence(c, ds, cfg, &compositional));
    record.compositional_disclosure = compositional;
    record.results.push_back(check_ci_consistency(c, boot, cfg));
    record.results.push_back(check_discriminative_power(c, ds, cfg));

    record.verdict = assign_verdict(record.results, c.discovery_rho, cfg.marginal_effect_bound);
    return record;
}

Verdict assign_verdict(const std::vector<CheckResult>& results, double rho,
                       double marginal_effect_bound) {
    if (results.size() != 11) throw DataError("assign_verdict: expected 11 check results");

    Verdict v;
    auto result_of = [&](int id) -> const CheckResult& {
        for (const auto& r : results)
            if (r.check_id == id) return r;
        throw DataError("assign_verdict: missing check " + std::to_string(id));
    };

    for (const auto& r : results) {
        if (!r.applicable) continue;
        ++v.applicable_count;
        if (r.passed) ++v.pass_count;
    }
    for (int id : {7, 9, 10}) {
        const auto& r = result_of(id);
        if (r.applicable && !r.passed) v.hard_gate_failures.push_back(id);
    }
    for (int id : {1, 2, 3, 10}) {
        const auto& r = result_of(id);
        if (!(r.applicable && r.passed)) v.core_failures.push_back(id);
    }

    if (!v.hard_gate_failures.empty()) {
        v.status = VerdictStatus::rejected;
        return v;
    }
    bool first_three_failed = true;
    for (int id : {1, 2, 3}) {
        const auto& r = result_of(id);
        first_three_failed = first_three_failed && r.applicable && !r.passed;
    }
    if (first_three_failed) {
        v.status = VerdictStatus::rejected;
        return v;
    }

    const double rate =
        v.applicable_count ? double(v.pass_count) / double(v.applicable_count) : 0.0;
    const bool core_ok = v.core_failures.empty();
    if (rate >= 0.70 && core_ok) {
        v.status = std::fabs(rho) < marginal_effect_bound ? VerdictStatus::conditional
                                                          : VerdictStatus::validated;
    } else if (rate >= 0.40) {
        v.status = VerdictStatus::conditional;
    } else {
        v.status = VerdictStatus::rejected;
    }
    return v;
}

}  // namespace biomark
