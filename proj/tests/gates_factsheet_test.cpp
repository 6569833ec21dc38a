#include <doctest.h>

#include <cmath>

#include "biomark/common.hpp"
#include "biomark/factsheet.hpp"
#include "biomark/gates.hpp"
#include "biomark/rng.hpp"

using namespace biomark;

namespace {

ModelEval eval_of(double train, double cv, MetricKind kind) {
    ModelEval e;
    e.train_metric = train;
    e.cv_metric = cv;
    e.metric_kind = kind;
    e.fold_metrics = {cv};
    return e;
}

}  // namespace

TEST_CASE("multicollinearity gate boundaries") {
    Rng rng(301, "vif-gate");
    const std::size_t n = 50;
    std::vector<double> a(n), b(n), dup(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.next_normal();
        b[i] = rng.next_normal();
        dup[i] = a[i];
    }
    const auto ok = gate_multicollinearity(Matrix::from_columns({a, b}));
    CHECK_FALSE(ok.triggered);
    CHECK(ok.measured_value == doctest::Approx(1.0).epsilon(0.2));

    const auto bad = gate_multicollinearity(Matrix::from_columns({a, dup}));
    CHECK(bad.triggered);
    CHECK(std::isinf(bad.measured_value));
    CHECK(bad.suppressed_artifact == "coefficient_table");
}

TEST_CASE("performance gate: strict boundaries and published anchors") {
    CHECK(gate_performance(eval_of(0.6, 0.535, MetricKind::auc)).triggered);   // AUC 0.535
    CHECK_FALSE(gate_performance(eval_of(0.5, 0.389, MetricKind::r2)).triggered);  // R2 0.389
    CHECK_FALSE(gate_performance(eval_of(0.6, 0.55, MetricKind::auc)).triggered);  // == passes
    CHECK(gate_performance(eval_of(0.6, 0.55 - 1e-9, MetricKind::auc)).triggered);
    CHECK_FALSE(gate_performance(eval_of(0.2, 0.0, MetricKind::r2)).triggered);    // == passes
    CHECK(gate_performance(eval_of(0.2, -1e-9, MetricKind::r2)).triggered);
}

TEST_CASE("overfitting gate: ratio 5 boundary and degenerate CV") {
    CHECK_FALSE(gate_overfitting(eval_of(0.9, 0.3, MetricKind::r2)).triggered);  // ratio 3
    CHECK(gate_overfitting(eval_of(0.9, 0.15, MetricKind::r2)).triggered);       // ratio 6
    CHECK_FALSE(gate_overfitting(eval_of(0.5, 0.1, MetricKind::r2)).triggered);  // exactly 5
    CHECK(gate_overfitting(eval_of(0.5 + 1e-9, 0.1, MetricKind::r2)).triggered);
    // cv <= 0 with positive train triggers (infinite-ratio reading).
    CHECK(gate_overfitting(eval_of(0.4, -0.1, MetricKind::r2)).triggered);
    CHECK_FALSE(gate_overfitting(eval_of(-0.2, -0.1, MetricKind::r2)).triggered);
}

TEST_CASE("ablation gate fires only when every model sits at chance") {
    std::vector<ModelEval> all_chance = {eval_of(0.5, 0.51, MetricKind::auc),
                                         eval_of(0.2, -0.05, MetricKind::r2)};
    CHECK(gate_ablation(all_chance).triggered);

    std::vector<ModelEval> one_good = {eval_of(0.5, 0.51, MetricKind::auc),
                                       eval_of(0.4, 0.2, MetricKind::r2)};
    CHECK_FALSE(gate_ablation(one_good).triggered);

    // Band edges: 0.52 inclusive, 0.521 outside.
    CHECK(gate_ablation({eval_of(0.5, 0.52, MetricKind::auc)}).triggered);
    CHECK_FALSE(gate_ablation({eval_of(0.5, 0.521, MetricKind::auc)}).triggered);
}

TEST_CASE("forest dedup keeps the top two per family") {
    std::vector<FamilyMember> fam = {
        {"sleep_var_sd", "", 0.40},
        {"sleep_var_cv", "", 0.35},
        {"sleep_var_iqr", "", 0.30},
        {"sleep_var_range", "", 0.25},
        {"steps_mean", "", 0.20},
    };
    const auto res = gate_forest_dedup(fam);
    CHECK(res.report.triggered);
    CHECK(res.kept.size() == 3);  // two sleep_var + one steps
    CHECK(res.suppressed.size() == 2);
    for (const auto& m : res.suppressed) CHECK(m.family == "sleep_var");

    // Families of size <= 2 pass through untouched.
    const auto small = gate_forest_dedup({{"a_x", "", 0.3}, {"b_y", "", 0.2}});
    CHECK_FALSE(small.report.triggered);
    CHECK(small.suppressed.empty());

    // |rho| ties break lexicographically.
    const auto tie = gate_forest_dedup(
        {{"fam_c", "f", 0.3}, {"fam_b", "f", 0.3}, {"fam_a", "f", -0.3}});
    CHECK(tie.kept.size() == 2);
    CHECK(tie.kept[0].name == "fam_a");
    CHECK(tie.kept[1].name == "fam_b");
}

TEST_CASE("fact sheet hash is insertion-order invariant") {
    FactSheet a, b;
    a.set_int("cohort.n_participants", 7497);
    a.set_real("model.cv_r2", 0.228);
    a.set_text("run.task", "regression");
    b.set_text("run.task", "regression");
    b.set_real("model.cv_r2", 0.228);
    b.set_int("cohort.n_participants", 7497);
    CHECK(a.content_hash() == b.content_hash());

    b.set_real("model.cv_r2", 0.229);
    CHECK(a.content_hash() != b.content_hash());

    CHECK(a.numeric("cohort.n_participants") == 7497.0);
    CHECK_THROWS_AS(a.get("missing.key"), DataError);
}

TEST_CASE("verify_numbers corrects within 3x and flags beyond") {
    FactSheet fs;
    fs.run_id = "r1";
    fs.set_int("cohort.n_participants", 7497);

    AuditLog log;
    const auto res = verify_numbers("We enrolled 7,500 participants in total.", fs,
                                    default_bindings(), "abstract", &log);
    CHECK(res.text == "We enrolled 7,497 participants in total.");
    REQUIRE(res.records.size() == 1);
    CHECK(res.records[0].action == AuditRecord::Action::corrected);
    CHECK(res.records[0].written == 7500.0);
    CHECK(res.records[0].truth == 7497.0);
    CHECK(log.records().size() == 1);

    const auto far = verify_numbers("We enrolled 100 participants.", fs, default_bindings(),
                                    "abstract", &log);
    CHECK(far.text == "We enrolled 100 participants.");  // untouched
    REQUIRE(far.records.size() == 1);
    CHECK(far.records[0].action == AuditRecord::Action::flagged_uncorrected);

    const auto exact = verify_numbers("All 7,497 participants consented.", fs,
                                      default_bindings(), "abstract", &log);
    CHECK(exact.records.empty());
    CHECK(exact.text == "All 7,497 participants consented.");
}

TEST_CASE("verify_numbers is idempotent and preserves formatting context") {
    FactSheet fs;
    fs.set_int("battery.n_checks", 11);
    fs.set_int("cohort.n_features", 197);

    const std::string text = "The battery ran 12 checks over 200 features (see table).";
    const auto once = verify_numbers(text, fs, default_bindings(), "body");
    const auto twice = verify_numbers(once.text, fs, default_bindings(), "body");
    CHECK(once.text == "The battery ran 11 checks over 197 features (see table).");
    CHECK(twice.text == once.text);
    CHECK(twice.records.empty());
    CHECK(once.records.size() == 2);
}

TEST_CASE("verify_numbers leaves unbound numbers alone") {
    FactSheet fs;
    fs.set_int("cohort.n_participants", 500);
    const auto res = verify_numbers("Table 3 lists 450 rows of output.", fs,
                                    default_bindings(), "body");
    CHECK(res.records.empty());
    CHECK(res.text == "Table 3 lists 450 rows of output.");
}

TEST_CASE("audit records carry logical timestamps in append order") {
    AuditLog log;
    for (int i = 0; i < 3; ++i) {
        AuditRecord r;
        r.run_id = "run";
        r.key = "k" + std::to_string(i);
        log.append(r);
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(log.records()[i].ts == i);
    const auto line = audit_record_line(log.records()[1]);
    CHECK(line.find("ts=1") == 0);
    CHECK(line.find("key=k1") != std::string::npos);
}

TEST_CASE("consistency check flags a corrupted number") {
    FactSheet fs;
    fs.set_int("cohort.n_participants", 7497);
    fs.set_real("model.cv_r2", 0.228);

    ReportSection good;
    good.name = "results";
    good.numbers = {{"cohort.n_participants", std::int64_t(7497)},
                    {"model.cv_r2", 0.228}};
    CHECK(consistency_check({good}, fs).pass);

    ReportSection bad = good;
    bad.numbers["model.cv_r2"] = 0.229;
    const auto res = consistency_check({good, bad}, fs);
    CHECK_FALSE(res.pass);
    REQUIRE(res.mismatches.size() == 1);
    CHECK(res.mismatches[0].key == "model.cv_r2");

    ReportSection phantom;
    phantom.name = "extra";
    phantom.numbers = {{"not.a.key", std::int64_t(1)}};
    CHECK_FALSE(consistency_check({phantom}, fs).pass);
}
