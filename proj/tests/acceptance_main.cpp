// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Oracles are the brute-force implementations in oracles.hpp;
// every tolerance is pinned here in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "biomark/battery.hpp"
#include "biomark/common.hpp"
#include "biomark/correlation.hpp"
#include "biomark/factsheet.hpp"
#include "biomark/firewall.hpp"
#include "biomark/gates.hpp"
#include "biomark/model_eval.hpp"
#include "biomark/pipeline.hpp"
#include "biomark/preprocess.hpp"
#include "biomark/regression.hpp"
#include "biomark/resample.hpp"
#include "biomark/rng.hpp"
#include "biomark/robustness.hpp"
#include "biomark/screening.hpp"
#include "biomark/synth.hpp"
#include "oracles.hpp"

using namespace biomark;

namespace {

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
};

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Kernel oracle equivalence on 200 random small inputs.
bool criterion_kernels(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(4242, "acceptance.kernels");
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 10 + rng.next_below(41);  // 10..50
        const bool tied = trial % 3 == 0;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = tied ? double(rng.next_below(6)) : rng.next_normal();
            y[i] = 0.4 * x[i] + rng.next_normal();
        }
        bool cx = true, cy = true;
        for (double v : x) cx = cx && v == x[0];
        for (double v : y) cy = cy && v == y[0];
        if (cx || cy) continue;

        if (!close(spearman(x, y).estimate, oracle::spearman(x, y), 1e-10)) {
            note = "spearman mismatch";
            return false;
        }
        if (!close(pearson(x, y).estimate, oracle::pearson(x, y), 1e-10)) {
            note = "pearson mismatch";
            return false;
        }
        if (!close(kendall_tau_b(x, y).estimate, oracle::kendall_tau_b(x, y), 1e-10)) {
            note = "kendall mismatch";
            return false;
        }

        std::vector<double> z1(n), z2(n);
        for (std::size_t i = 0; i < n; ++i) {
            z1[i] = rng.next_normal();
            z2[i] = rng.next_normal();
        }
        const auto ps = partial_spearman(x, y, Matrix::from_columns({z1, z2}));
        if (!close(ps.estimate, oracle::partial_spearman(x, y, {z1, z2}), 1e-10)) {
            note = "partial spearman mismatch";
            return false;
        }

        std::vector<int> labels(n);
        bool has0 = false, has1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = rng.next_double() < 0.5;
            (labels[i] ? has1 : has0) = true;
        }
        if (has0 && has1 && !close(auc(x, labels), oracle::auc(x, labels), 1e-10)) {
            note = "auc mismatch";
            return false;
        }

        const std::size_t p = 2 + rng.next_below(3);
        Matrix X(n, p);
        for (std::size_t i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            for (std::size_t j = 1; j < p; ++j) X(i, j) = rng.next_normal();
        }
        std::vector<std::vector<double>> cols;
        for (std::size_t j = 0; j < p; ++j) cols.push_back(X.column(j));
        const auto bo = ols_fit(X, y);
        const auto bo_want = oracle::ols(cols, y);
        const auto br = ridge_fit(X, y, 1.3);
        const auto br_want = oracle::ridge(cols, y, 1.3);
        for (std::size_t j = 0; j < p; ++j) {
            if (!close(bo[j], bo_want[j], 1e-8)) {
                note = "ols mismatch";
                return false;
            }
            if (!close(br[j], br_want[j], 1e-8)) {
                note = "ridge mismatch";
                return false;
            }
        }
        ++checked;
    }
    const double dt = seconds_since(t0);
    note = std::to_string(checked) + " inputs, " + std::to_string(dt) + " s";
    return checked >= 190 && dt < 10.0;
}

// ---------------------------------------------------------------------------
// 2. Permutation exactness and Monte-Carlo calibration.
bool criterion_permutation(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();

    // Exhaustive enumeration oracle at n=4, y=x.  Both the identity and the
    // full reversal reach |rho| = 1, so the exact two-sided p over all 24
    // permutations is 2/24 (the one-sided count is the 1/24 sometimes
    // quoted).  The sampled estimator must agree within Monte-Carlo error.
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> perm = x;
    int hits = 0, total = 0;
    std::sort(perm.begin(), perm.end());
    do {
        double d2 = 0;
        for (int i = 0; i < 4; ++i) d2 += (perm[i] - x[i]) * (perm[i] - x[i]);
        const double rho = 1.0 - 6.0 * d2 / (4.0 * 15.0);
        if (std::fabs(rho) >= 1.0 - 1e-12) ++hits;
        ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (total != 24 || hits != 2) {
        note = "enumeration oracle expected 2/24, got " + std::to_string(hits) + "/" +
               std::to_string(total);
        return false;
    }
    const double exact = double(hits) / double(total);
    const double sampled = permutation_pvalue(x, x, CorrMethod::spearman, 1000, 99);
    if (std::fabs(sampled - exact) > 0.03) {
        note = "sampled p " + std::to_string(sampled) + " vs exact " + std::to_string(exact);
        return false;
    }

    // n=50, y = x: only measure-zero permutations reach |rho|=1 -> floor.
    std::vector<double> big(50);
    Rng brng(7, "acceptance.perm-floor");
    for (auto& v : big) v = brng.next_normal();
    if (permutation_pvalue(big, big, CorrMethod::spearman, 1000, 3) != 1.0 / 1001.0) {
        note = "perfect-relation p floor violated";
        return false;
    }

    // Calibration: independent inputs, 1000 trials, fraction p<0.05 within
    // [0.03, 0.07].
    int low = 0;
    Rng rng(515, "acceptance.perm-calib");
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 30;
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.next_normal();
            b[i] = rng.next_normal();
        }
        const double p = permutation_pvalue(a, b, CorrMethod::spearman, 1000,
                                            derive_key(515, "trial", std::to_string(trial)));
        if (p < 0.05) ++low;
    }
    const double frac = low / 1000.0;
    const double dt = seconds_since(t0);
    note = "exact 2/24 matched; calibration " + std::to_string(frac) + "; " +
           std::to_string(dt) + " s";
    return frac >= 0.03 && frac <= 0.07 && dt < 60.0;
}

// ---------------------------------------------------------------------------
// 3. FDR control on 90%-null mixtures plus BH monotonicity.
bool criterion_fdr(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    double fdp_sum = 0.0;
    const int n_seeds = 200;
    for (int seed = 0; seed < n_seeds; ++seed) {
        CohortSpec spec;
        spec.n_participants = 150;
        spec.n_noise_features = 90;
        spec.planted.clear();
        for (int s = 0; s < 10; ++s)
            spec.planted.push_back({"sig" + std::to_string(s), PlantKind::linear_signal,
                                    0.55 + 0.02 * (s % 5), 0.3, ""});
        spec.seed = 90000 + seed;
        const auto [ds, manifest] = generate(spec);

        std::vector<std::string> names = ds.candidate_names();
        std::vector<double> pvals;
        pvals.reserve(names.size());
        for (const auto& n : names)
            pvals.push_back(spearman(ds.feature(n), ds.target()).p_value);
        const auto bh = bh_fdr(pvals, 0.05);
        std::size_t rejected = 0, false_rejected = 0;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (!bh.rejected[i]) continue;
            ++rejected;
            if (manifest.find(names[i]) == nullptr) ++false_rejected;
        }
        fdp_sum += rejected ? double(false_rejected) / double(rejected) : 0.0;
    }
    const double fdr = fdp_sum / n_seeds;

    Rng rng(606, "acceptance.bh-mono");
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 1 + rng.next_below(50);
        std::vector<double> p(m);
        for (auto& v : p) v = rng.next_double();
        const auto res = bh_fdr(p);
        for (std::size_t i = 0; i < m; ++i) {
            if (res.adjusted[i] < p[i] - 1e-15) {
                note = "adjusted < raw";
                return false;
            }
            for (std::size_t j = 0; j < m; ++j)
                if (p[i] <= p[j] && res.adjusted[i] > res.adjusted[j] + 1e-15) {
                    note = "BH monotonicity violated";
                    return false;
                }
        }
    }
    const double dt = seconds_since(t0);
    note = "empirical FDR " + std::to_string(fdr) + "; " + std::to_string(dt) + " s";
    return fdr <= 0.05 + 0.02 && dt < 30.0;
}

// ---------------------------------------------------------------------------
// 4. Tautology defense: firewall removal, and hard-gate rejection with the
//    firewall disabled.
bool criterion_tautology(std::string& note) {
    int firewall_ok = 0, gate_ok = 0;
    for (int seed = 1; seed <= 20; ++seed) {
        CohortSpec spec;
        spec.n_participants = 400;
        spec.n_noise_features = 5;
        spec.planted = {{"glucose_sq", PlantKind::monotone_tautology, 0.0, 0.3, ""}};
        spec.seed = 70000 + seed;
        const auto [ds, manifest] = generate(spec);

        // Path A: the overlap scan removes it.
        LeakageConfig cfg;
        const auto scan = construct_overlap_scan(ds, ds.candidate_names(), cfg);
        bool flagged = false;
        for (const auto& f : scan.flagged)
            if (f.candidate == "glucose_sq" && std::fabs(f.rho) > 0.85) flagged = true;
        if (flagged) ++firewall_ok;

        // Path B: firewall disabled; the battery's hard gates reject it.
        CohortSpec conf_spec = spec;
        conf_spec.n_participants = 150;
        conf_spec.seed = spec.seed + 50000;
        const auto conf = generate(conf_spec);

        CandidateBiomarker c;
        c.name = "glucose_sq";
        c.task_type = TaskType::regression;
        c.discovery_rho = spearman(ds.feature("glucose_sq"), ds.target()).estimate;
        BatteryInput in;
        in.discovery = &ds;
        in.confirmation = &conf.ds;
        BatteryConfig bat;
        bat.master_seed = 70000 + seed;
        const auto record = run_battery(c, in, bat);
        std::size_t passed = 0;
        for (const auto& r : record.results)
            if (r.applicable && r.passed) ++passed;
        if (record.verdict.status == VerdictStatus::rejected &&
            !record.verdict.hard_gate_failures.empty() && passed >= 8)
            ++gate_ok;
    }
    note = "firewall " + std::to_string(firewall_ok) + "/20, hard-gate " +
           std::to_string(gate_ok) + "/20";
    return firewall_ok == 20 && gate_ok == 20;
}

// ---------------------------------------------------------------------------
// 5. Verdict boundary conformance.
bool criterion_verdicts(std::string& note) {
    auto results = [](const std::vector<int>& passed, const std::vector<int>& inapplicable) {
        std::vector<CheckResult> out;
        for (int id = 1; id <= 11; ++id) {
            CheckResult r;
            r.check_id = id;
            r.applicable = std::find(inapplicable.begin(), inapplicable.end(), id) ==
                           inapplicable.end();
            r.passed =
                r.applicable && std::find(passed.begin(), passed.end(), id) != passed.end();
            out.push_back(r);
        }
        return out;
    };
    // Exact rates 0.69/0.39 are unrepresentable with 11 checks; these sets
    // bracket the 0.70 and 0.40 boundaries from both sides.
    struct Case {
        std::vector<int> passed, inapplicable;
        double rho;
        VerdictStatus want;
    };
    const std::vector<Case> cases = {
        // rate 0.70 exactly (7/10), cores + gates pass -> VALIDATED.
        {{1, 2, 3, 7, 9, 10, 4}, {8}, 0.30, VerdictStatus::validated},
        // rate 0.636 (7/11), cores pass -> CONDITIONAL.
        {{1, 2, 3, 7, 9, 10, 4}, {}, 0.30, VerdictStatus::conditional},
        // rate 0.727 (8/11) with a failed core (1) -> CONDITIONAL.
        {{2, 3, 4, 5, 6, 7, 9, 10}, {}, 0.30, VerdictStatus::conditional},
        // rate 0.40 exactly (4/10) -> CONDITIONAL.
        {{2, 7, 9, 10}, {8}, 0.30, VerdictStatus::conditional},
        // rate 0.364 (4/11) -> REJECTED with no hard-gate failure.
        {{2, 7, 9, 10}, {}, 0.30, VerdictStatus::rejected},
        // Hard gates dominate 10/11 passes.
        {{1, 2, 3, 4, 5, 6, 7, 8, 10, 11}, {}, 0.50, VerdictStatus::rejected},
        {{1, 2, 3, 4, 5, 6, 8, 9, 10, 11}, {}, 0.50, VerdictStatus::rejected},
        {{1, 2, 3, 4, 5, 6, 7, 8, 9, 11}, {}, 0.50, VerdictStatus::rejected},
        // Checks 1-3 all failing rejects despite an 8/11 rate.
        {{4, 5, 6, 7, 8, 9, 10, 11}, {}, 0.50, VerdictStatus::rejected},
        // Marginal-effect downgrade: 11/11 but |rho| < 0.10.
        {{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, {}, 0.08, VerdictStatus::conditional},
        // Same pass set, healthy effect -> VALIDATED.
        {{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, {}, 0.25, VerdictStatus::validated},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        const auto v = assign_verdict(results(c.passed, c.inapplicable), c.rho, 0.10);
        if (v.status != c.want) {
            note = "case " + std::to_string(i) + " got " + verdict_name(v.status);
            return false;
        }
    }
    note = std::to_string(cases.size()) + " boundary cases";
    return true;
}

// ---------------------------------------------------------------------------
// 6. Leakage-free folds and splits on repeated-measures data.
bool criterion_folds(std::string& note) {
    Rng rng(808, "acceptance.folds");
    for (int trial = 0; trial < 100; ++trial) {
        CohortSpec spec;
        // Enough participants that the 30% confirmation side clears its
        // N >= 20 floor.
        spec.n_participants = 70 + rng.next_below(80);
        spec.rows_total = spec.n_participants + rng.next_below(spec.n_participants);
        spec.n_noise_features = 3;
        spec.seed = 30000 + trial;
        const auto [ds, manifest] = generate(spec);

        const auto fa = stratified_participant_kfold(ds, 5, 12345 + trial);
        const auto rows_of = ds.rows_by_participant();
        for (const auto& [pid, rows] : rows_of) {
            std::set<int> folds;
            for (std::size_t r : rows) folds.insert(fa.fold_of_row[r]);
            if (folds.size() != 1) {
                note = "participant spans folds";
                return false;
            }
        }
        std::set<int> used(fa.fold_of_row.begin(), fa.fold_of_row.end());
        if (used.size() != 5) {
            note = "empty fold";
            return false;
        }

        LeakageConfig cfg;
        const auto split = discovery_confirmation_split(ds, cfg, 999 + trial);
        std::set<std::string> disc(split.discovery.participant_ids().begin(),
                                   split.discovery.participant_ids().end());
        std::set<std::string> conf_v(split.confirmation.participant_ids().begin(),
                                     split.confirmation.participant_ids().end());
        for (const auto& id : conf_v)
            if (disc.count(id)) {
                note = "discovery/confirmation overlap";
                return false;
            }
        if (conf_v.size() != split.confirmation.n_rows()) {
            note = "confirmation rows not participant-unique";
            return false;
        }
    }

    // GLOBEM-shape preset: 704 rows over 497 unique participants.
    auto gspec = globem_shape();
    const auto [gds, gman] = generate(gspec);
    if (gds.n_rows() != 704 || gds.unique_participants().size() != 497) {
        note = "globem preset shape wrong";
        return false;
    }
    const auto gfa = stratified_participant_kfold(gds, 5, 77);
    const auto grows = gds.rows_by_participant();
    for (const auto& [pid, rows] : grows) {
        std::set<int> folds;
        for (std::size_t r : rows) folds.insert(gfa.fold_of_row[r]);
        if (folds.size() != 1) {
            note = "globem participant spans folds";
            return false;
        }
    }
    note = "100 random tables + globem preset";
    return true;
}

// ---------------------------------------------------------------------------
// 7. Battery sensitivity/specificity against the manifest.
bool criterion_battery(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    int validated_signal = 0, loo_fails = 0, subgroup_fails = 0, noise_rejected = 0;
    for (int seed = 1; seed <= 20; ++seed) {
        CohortSpec spec;
        spec.n_participants = 1000;
        spec.n_noise_features = 1;
        spec.planted = {
            {"signal", PlantKind::linear_signal, 0.4, 0.3, ""},
            {"lever", PlantKind::outlier_driven, 0.0, 0.3, ""},
            {"vshape", PlantKind::subgroup_inconsistent, 0.0, 0.3, ""},
        };
        spec.seed = std::uint64_t(seed);
        const auto disc = generate(spec);

        CohortSpec conf_spec = spec;
        conf_spec.n_participants = 300;
        conf_spec.seed = spec.seed + 90000;
        const auto conf = generate(conf_spec);

        BatteryConfig bat;
        bat.master_seed = std::uint64_t(seed) * 31;
        BatteryInput in;
        in.discovery = &disc.ds;
        in.confirmation = &conf.ds;

        auto candidate = [&](const std::string& name) {
            CandidateBiomarker c;
            c.name = name;
            c.task_type = TaskType::regression;
            c.discovery_rho = spearman(disc.ds.feature(name), disc.ds.target()).estimate;
            return c;
        };

        if (run_battery(candidate("signal"), in, bat).verdict.status ==
            VerdictStatus::validated)
            ++validated_signal;
        {
            const auto rec = run_battery(candidate("lever"), in, bat);
            if (!rec.results[3].passed) ++loo_fails;  // check 4
        }
        {
            const auto rec = run_battery(candidate("vshape"), in, bat);
            if (!rec.results[4].passed) ++subgroup_fails;  // check 5
        }
        if (run_battery(candidate("noise_0"), in, bat).verdict.status ==
            VerdictStatus::rejected)
            ++noise_rejected;
    }
    const double dt = seconds_since(t0);
    note = "signal " + std::to_string(validated_signal) + "/20, loo " +
           std::to_string(loo_fails) + "/20, subgroup " + std::to_string(subgroup_fails) +
           "/20, noise " + std::to_string(noise_rejected) + "/20; " + std::to_string(dt) +
           " s";
    return validated_signal >= 18 && loo_fails >= 18 && subgroup_fails >= 18 &&
           noise_rejected >= 19 && dt < 300.0;
}

// ---------------------------------------------------------------------------
// 8. Power math against the published anchors.
bool criterion_power(std::string& note) {
    const double r497 = min_detectable_rho(497);
    const double r1078 = min_detectable_rho(1078);
    const double r7497 = min_detectable_rho(7497);
    note = "497->" + std::to_string(r497) + " 1078->" + std::to_string(r1078) +
           " 7497->" + std::to_string(r7497);
    return close(std::round(r497 * 100.0) / 100.0, 0.13, 1e-12) &&
           close(std::round(r1078 * 100.0) / 100.0, 0.09, 1e-12) &&
           std::fabs(r7497 - 0.036) <= 0.005;
}

// ---------------------------------------------------------------------------
// 9. Quality-gate boundary semantics.
bool criterion_gates(std::string& note) {
    auto eval_of = [](double train, double cv, MetricKind kind) {
        ModelEval e;
        e.train_metric = train;
        e.cv_metric = cv;
        e.metric_kind = kind;
        return e;
    };
    const double eps = 1e-9;

    // VIF 50 vs 50+eps: drive via a synthetic pair with known VIF.
    // VIF = 1/(1-r^2); r^2 = 1 - 1/50 gives exactly 50.
    auto vif_pair = [&](double target_vif) {
        const std::size_t n = 2000;
        const double r2 = 1.0 - 1.0 / target_vif;
        const double r = std::sqrt(r2);
        Rng rng(11, "acceptance.vif");
        std::vector<double> a(n), b(n);
        // Deterministic orthogonal construction so the sample R^2 is exact:
        // alternate +-1 core with a small orthogonal wiggle.
        for (std::size_t i = 0; i < n; ++i) {
            const double core = i % 2 ? 1.0 : -1.0;
            const double orth = (i % 4 < 2) ? 1.0 : -1.0;
            a[i] = core;
            b[i] = r * core + std::sqrt(1.0 - r2) * orth;
        }
        return gate_multicollinearity(Matrix::from_columns({a, b}));
    };
    const auto at50 = vif_pair(50.0);
    const auto above = vif_pair(50.0 * (1 + 1e-6));
    if (at50.triggered || !above.triggered) {
        note = "VIF boundary (50: " + std::to_string(at50.measured_value) + ")";
        return false;
    }

    if (gate_overfitting(eval_of(0.5, 0.1, MetricKind::r2)).triggered ||
        !gate_overfitting(eval_of(0.5 + eps, 0.1, MetricKind::r2)).triggered) {
        note = "ratio-5 boundary";
        return false;
    }
    if (gate_performance(eval_of(0.6, 0.55, MetricKind::auc)).triggered ||
        !gate_performance(eval_of(0.6, 0.55 - eps, MetricKind::auc)).triggered) {
        note = "AUC 0.55 boundary";
        return false;
    }
    if (gate_performance(eval_of(0.2, 0.0, MetricKind::r2)).triggered ||
        !gate_performance(eval_of(0.2, -eps, MetricKind::r2)).triggered) {
        note = "R2 0 boundary";
        return false;
    }
    // Published anchors: CV AUC 0.535 triggers; CV R2 0.389 does not.
    if (!gate_performance(eval_of(0.6, 0.535, MetricKind::auc)).triggered ||
        gate_performance(eval_of(0.5, 0.389, MetricKind::r2)).triggered) {
        note = "published-value anchors";
        return false;
    }
    note = "all boundaries strict";
    return true;
}

// ---------------------------------------------------------------------------
// 10. Numeric verification and consistency enforcement.
bool criterion_verification(std::string& note) {
    FactSheet fs;
    fs.run_id = "acceptance";
    fs.set_int("cohort.n_participants", 7497);
    fs.set_int("battery.n_validated", 22);

    AuditLog log;
    const std::string text =
        "We analyzed 7,500 participants and report 21 validated candidates; "
        "an earlier draft claimed 100 participants.";
    const auto pass1 = verify_numbers(text, fs, default_bindings(), "s1", &log);
    // 7,500 -> corrected (within 3x); 21 -> corrected; 100 -> flagged.
    int corrected = 0, flagged = 0;
    for (const auto& r : pass1.records)
        (r.action == AuditRecord::Action::corrected ? corrected : flagged)++;
    if (corrected != 2 || flagged != 1) {
        note = "expected 2 corrections + 1 flag, got " + std::to_string(corrected) + "+" +
               std::to_string(flagged);
        return false;
    }
    if (pass1.text.find("7,497 participants") == std::string::npos ||
        pass1.text.find("22 validated") == std::string::npos ||
        pass1.text.find("100 participants") == std::string::npos) {
        note = "corrected text wrong: " + pass1.text;
        return false;
    }
    // Idempotence: a second pass only re-flags the out-of-tolerance value.
    const auto pass2 = verify_numbers(pass1.text, fs, default_bindings(), "s1", &log);
    if (pass2.text != pass1.text) {
        note = "not idempotent";
        return false;
    }
    for (const auto& r : pass2.records)
        if (r.action == AuditRecord::Action::corrected) {
            note = "second pass corrected again";
            return false;
        }
    // Every correction shows up in the audit log.
    if (log.records().size() != pass1.records.size() + pass2.records.size()) {
        note = "audit log incomplete";
        return false;
    }

    // Consistency check fails a report with one corrupted number.
    ReportSection ok;
    ok.name = "results";
    ok.numbers = {{"cohort.n_participants", std::int64_t(7497)}};
    ReportSection bad = ok;
    bad.numbers["cohort.n_participants"] = std::int64_t(7496);
    if (!consistency_check({ok}, fs).pass || consistency_check({ok, bad}, fs).pass) {
        note = "consistency verdicts wrong";
        return false;
    }
    note = "corrections, flags, idempotence, audit, consistency";
    return true;
}

// ---------------------------------------------------------------------------
// 11. Robustness harness direction.
bool criterion_robustness(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    CohortSpec spec;
    spec.n_participants = 600;
    spec.n_noise_features = 3;
    spec.seed = 61000;
    spec.planted = {
        {"s1", PlantKind::linear_signal, 0.40, 0.3, "", false},
        {"s2", PlantKind::linear_signal, 0.32, 0.3, "", false},
        {"s3", PlantKind::linear_signal, 0.26, 0.3, "", false},
        {"conf_a", PlantKind::confounded, 0.30, 0.3, "site_a", false},
        {"conf_b", PlantKind::confounded, 0.26, 0.3, "site_b", false},
        {"v1", PlantKind::subgroup_inconsistent, 0.0, 0.3, "", true},
        {"v2", PlantKind::subgroup_inconsistent, 0.0, 0.3, "", true},
        {"v3", PlantKind::subgroup_inconsistent, 0.0, 0.3, "", true},
    };
    spec.n_noise_features = 5;
    const auto [ds, manifest] = generate(spec);

    RobustnessConfig cfg;
    cfg.n_seeds = 10;
    cfg.master_seed = 424242;
    const auto report = robustness_harness(ds, cfg);

    int conf_wins = 0, subgroup_wins = 0;
    for (const auto& seed : report.seeds) {
        const auto d = [&](const ConditionMetrics& cm, int which) {
            const auto& base = seed.baseline;
            return which == 0
                       ? cm.confounder_survival.value - base.confounder_survival.value
                       : cm.subgroup_consistency.value - base.subgroup_consistency.value;
        };
        if (d(seed.checked, 0) > d(seed.random_pruned, 0)) ++conf_wins;
        if (d(seed.checked, 1) > d(seed.random_pruned, 1)) ++subgroup_wins;
    }
    const double dt = seconds_since(t0);
    note = "confounder " + std::to_string(conf_wins) + "/10, subgroup " +
           std::to_string(subgroup_wins) + "/10; " + std::to_string(dt) + " s";
    return conf_wins >= 8 && subgroup_wins >= 8 && dt < 180.0;
}

// ---------------------------------------------------------------------------
// 12. Determinism across thread counts and runtime at scale.
bool criterion_determinism_scale(std::string& note) {
    namespace fs = std::filesystem;
    const std::string dir = "acceptance_tmp";
    fs::remove_all(dir);
    fs::create_directories(dir);

    // 200-feature x 1000-row cohort through screen + battery.
    CohortSpec spec;
    spec.n_participants = 1000;
    spec.n_noise_features = 195;
    spec.planted = {
        {"s1", PlantKind::linear_signal, 0.40, 0.3, ""},
        {"s2", PlantKind::linear_signal, 0.30, 0.3, ""},
        {"s3", PlantKind::linear_signal, 0.25, 0.3, ""},
        {"s4", PlantKind::linear_signal, 0.22, 0.3, ""},
        {"leak", PlantKind::monotone_tautology, 0.0, 0.3, ""},
    };
    spec.seed = 52000;
    cmd_synth(spec, dir + "/cohort.csv", dir + "/manifest.json");

    RunConfig cfg;
    cfg.input_path = dir + "/cohort.csv";
    cfg.out_dir = dir;
    cfg.roles.id_column = "participant_id";
    cfg.roles.target_column = "target";
    cfg.roles.demographic_columns = {"age"};
    cfg.roles.subgroup_columns = {"sex"};
    cfg.seed = 99;
    cfg.seed_set = true;

    const auto t0 = std::chrono::steady_clock::now();
    cfg.threads = 1;
    auto ctx1 = make_context(cfg);
    const auto rep1 = cmd_validate(ctx1);
    const double pipeline_s = seconds_since(t0);
    if (pipeline_s >= 60.0) {
        note = "pipeline took " + std::to_string(pipeline_s) + " s";
        fs::remove_all(dir);
        return false;
    }
    if (ctx1.facts.numeric("battery.n_validated") < 3) {
        note = "planted signals not validated";
        fs::remove_all(dir);
        return false;
    }

    cfg.threads = 4;
    auto ctx4 = make_context(cfg);
    const auto rep4 = cmd_validate(ctx4);
    if (rep1.dump() != rep4.dump() ||
        ctx1.facts.content_hash() != ctx4.facts.content_hash()) {
        note = "outputs differ across thread counts";
        fs::remove_all(dir);
        return false;
    }

    // GLOBEM-shape screen: 5508 features x 704 rows, 54.6% missingness.
    const auto tg = std::chrono::steady_clock::now();
    auto gspec = globem_shape();
    cmd_synth(gspec, dir + "/globem.csv", dir + "/globem_manifest.json");
    RunConfig gcfg;
    gcfg.input_path = dir + "/globem.csv";
    gcfg.out_dir = dir;
    gcfg.roles.id_column = "participant_id";
    gcfg.roles.target_column = "target";
    gcfg.roles.group_column = "wave";
    gcfg.roles.demographic_columns = {"age"};
    gcfg.roles.subgroup_columns = {"sex"};
    gcfg.screening.effect_threshold = 0.10;  // GLOBEM-scale effects
    gcfg.seed = 7;
    gcfg.seed_set = true;
    gcfg.threads = 1;
    auto gctx = make_context(gcfg);
    cmd_screen(gctx);
    const double globem_s = seconds_since(tg);

    fs::remove_all(dir);
    note = "pipeline " + std::to_string(pipeline_s) + " s, globem screen " +
           std::to_string(globem_s) + " s, thread-invariant";
    return globem_s < 300.0;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "kernel oracle equivalence", criterion_kernels},
        {2, "permutation exactness and calibration", criterion_permutation},
        {3, "FDR control and BH monotonicity", criterion_fdr},
        {4, "tautology defense (firewall + hard gates)", criterion_tautology},
        {5, "verdict boundary conformance", criterion_verdicts},
        {6, "leakage-free folds and splits", criterion_folds},
        {7, "battery sensitivity/specificity", criterion_battery},
        {8, "power math vs published anchors", criterion_power},
        {9, "quality-gate boundaries", criterion_gates},
        {10, "numeric verification and consistency", criterion_verification},
        {11, "robustness harness direction", criterion_robustness},
        {12, "determinism and scale", criterion_determinism_scale},
    };

    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    bool all_ok = true;
    for (const auto& c : criteria) {
        if (only && c.id != only) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    detail.c_str());
        std::fflush(stdout);
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
