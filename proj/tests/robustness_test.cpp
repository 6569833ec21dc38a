#include <doctest.h>

#include <cmath>
#include <set>

#include "biomark/common.hpp"
#include "biomark/robustness.hpp"
#include "biomark/synth.hpp"

using namespace biomark;

namespace {

// Cohort with confounded and subgroup-inconsistent plants: material for the
// checks to prune.
CohortSpec harness_spec(std::uint64_t seed) {
    CohortSpec spec;
    spec.n_participants = 500;
    spec.n_noise_features = 6;
    spec.seed = seed;
    spec.planted = {
        {"sig", PlantKind::linear_signal, 0.40, 0.3, ""},
        {"conf_a", PlantKind::confounded, 0.30, 0.3, "site_a"},
        {"conf_b", PlantKind::confounded, 0.25, 0.3, "site_b"},
        {"vshape", PlantKind::subgroup_inconsistent, 0.0, 0.3, ""},
    };
    return spec;
}

}  // namespace

TEST_CASE("harness is deterministic and structurally sound") {
    const auto [ds, manifest] = generate(harness_spec(211));
    RobustnessConfig cfg;
    cfg.n_seeds = 3;
    cfg.bootstrap_iters = 25;
    cfg.master_seed = 5;
    const auto a = robustness_harness(ds, cfg);
    const auto b = robustness_harness(ds, cfg);

    REQUIRE(a.seeds.size() == 3);
    REQUIRE(a.summaries.size() == 8);
    CHECK(a.family_size == 8);
    for (std::size_t s = 0; s < 3; ++s) {
        CHECK(a.seeds[s].baseline.confounder_survival.value ==
              b.seeds[s].baseline.confounder_survival.value);
        CHECK(a.seeds[s].checked.holdout_r2.value == b.seeds[s].checked.holdout_r2.value);
        // Matched pruning keeps exactly the checked count.
        CHECK(a.seeds[s].random_pruned.n_features == a.seeds[s].checked.n_features);
        // Deltas appear as condition minus baseline.
        CHECK(a.seeds[s].baseline.n_features == ds.candidate_names().size());
        // Bootstrap interval brackets are ordered.
        CHECK(a.seeds[s].checked.replication_rate.ci_low <=
              a.seeds[s].checked.replication_rate.ci_high);
    }
    for (const auto& summary : a.summaries) {
        CHECK(summary.per_seed_delta.size() == 3);
        CHECK(summary.q_value >= summary.p_value - 1e-12);
    }

    // Thread width never changes the numbers.
    auto cfg4 = cfg;
    cfg4.threads = 4;
    const auto c = robustness_harness(ds, cfg4);
    for (std::size_t s = 0; s < 3; ++s)
        CHECK(c.seeds[s].checked.confounder_survival.value ==
              a.seeds[s].checked.confounder_survival.value);
}

TEST_CASE("checked pruning beats random pruning on confounder survival") {
    const auto [ds, manifest] = generate(harness_spec(223));
    RobustnessConfig cfg;
    cfg.n_seeds = 6;
    cfg.bootstrap_iters = 10;
    cfg.master_seed = 9;
    const auto report = robustness_harness(ds, cfg);

    int checked_wins = 0;
    for (std::size_t s = 0; s < report.seeds.size(); ++s) {
        const double d_checked = report.seeds[s].checked.confounder_survival.value -
                                 report.seeds[s].baseline.confounder_survival.value;
        const double d_random = report.seeds[s].random_pruned.confounder_survival.value -
                                report.seeds[s].baseline.confounder_survival.value;
        if (d_checked > d_random) ++checked_wins;
    }
    CHECK(checked_wins >= 4);  // direction only; acceptance runs the full 10-seed version
}

TEST_CASE("harness rejects non-binary subgroups and missing demographics") {
    const auto [ds, manifest] = generate(harness_spec(227));
    RobustnessConfig cfg;
    cfg.subgroup_column = "absent";
    CHECK_THROWS_AS(robustness_harness(ds, cfg), DataError);

    Dataset no_demo(TaskType::regression, 60);
    std::vector<std::string> ids(60);
    std::vector<double> t(60);
    std::vector<std::string> sex(60);
    for (int i = 0; i < 60; ++i) {
        ids[i] = "p" + std::to_string(i);
        t[i] = i;
        sex[i] = i % 3 == 0 ? "A" : (i % 3 == 1 ? "B" : "C");
    }
    no_demo.set_participant_ids(ids);
    no_demo.set_target(t);
    no_demo.add_subgroup("sex", sex);
    no_demo.add_feature("f", t);
    RobustnessConfig cfg2;
    CHECK_THROWS_AS(robustness_harness(no_demo, cfg2), DataError);  // 3-level subgroup
}

TEST_CASE("clean signal cohort: checks prune nearly nothing, deltas stay small") {
    // Every candidate is a genuine unconfounded signal, so the train-side
    // checks retain (almost) everything and the deltas reflect only
    // sampling noise.
    CohortSpec spec;
    spec.n_participants = 500;
    spec.n_noise_features = 0;
    spec.seed = 229;
    spec.planted = {{"s1", PlantKind::linear_signal, 0.45, 0.3, ""},
                    {"s2", PlantKind::linear_signal, 0.40, 0.3, ""},
                    {"s3", PlantKind::linear_signal, 0.35, 0.3, ""},
                    {"s4", PlantKind::linear_signal, 0.30, 0.3, ""},
                    {"s5", PlantKind::linear_signal, 0.28, 0.3, ""},
                    {"s6", PlantKind::linear_signal, 0.25, 0.3, ""}};
    const auto [ds, manifest] = generate(spec);
    RobustnessConfig cfg;
    cfg.n_seeds = 4;
    cfg.bootstrap_iters = 10;
    cfg.master_seed = 17;
    const auto report = robustness_harness(ds, cfg);
    for (const auto& summary : report.summaries) {
        if (summary.condition != "checked") continue;
        CHECK(std::fabs(summary.mean_delta) < 0.25);
    }
}
