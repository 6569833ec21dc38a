#include "biomark/gates.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "biomark/regression.hpp"

namespace biomark {

const char* gate_name(GateId id) {
    switch (id) {
        case GateId::multicollinearity: return "multicollinearity";
        case GateId::performance: return "performance";
        case GateId::overfitting: return "overfitting";
        case GateId::ablation: return "ablation";
        case GateId::forest_dedup: return "forest_dedup";
    }
    return "?";
}

QualityGateReport gate_multicollinearity(const Matrix& final_model_design) {
    QualityGateReport rep;
    rep.id = GateId::multicollinearity;
    rep.threshold = 50.0;
    double max_vif = 0.0;
    if (final_model_design.cols() >= 2) {
        for (double v : vif(final_model_design)) max_vif = std::max(max_vif, v);
    } else {
        max_vif = 1.0;  // a single predictor cannot inflate
    }
    rep.measured_value = max_vif;
    rep.triggered = max_vif > rep.threshold;
    if (rep.triggered) rep.suppressed_artifact = "coefficient_table";
    return rep;
}

QualityGateReport gate_performance(const ModelEval& eval) {
    QualityGateReport rep;
    rep.id = GateId::performance;
    rep.measured_value = eval.cv_metric;
    if (eval.metric_kind == MetricKind::auc) {
        rep.threshold = 0.55;
        rep.triggered = eval.cv_metric < 0.55;
    } else {
        rep.threshold = 0.0;
        rep.triggered = eval.cv_metric < 0.0;
    }
    if (rep.triggered) rep.suppressed_artifact = "model_results_table";
    return rep;
}

QualityGateReport gate_overfitting(const ModelEval& eval) {
    QualityGateReport rep;
    rep.id = GateId::overfitting;
    rep.threshold = 5.0;
    if (eval.cv_metric > 0.0) {
        rep.measured_value = eval.train_metric / eval.cv_metric;
        rep.triggered = rep.measured_value > 5.0;
    } else {
        // Undefined ratio; positive train with non-positive CV reads as
        // infinitely overfit.
        rep.measured_value = eval.train_metric > 0.0
                                 ? std::numeric_limits<double>::infinity()
                                 : 0.0;
        rep.triggered = eval.train_metric > 0.0;
    }
    if (rep.triggered) rep.suppressed_artifact = "model_results_table";
    return rep;
}

QualityGateReport gate_ablation(const std::vector<ModelEval>& evals) {
    QualityGateReport rep;
    rep.id = GateId::ablation;
    rep.threshold = 0.02;  // chance band half-width for AUC
    bool all_chance = !evals.empty();
    double worst_margin = 0.0;
    for (const auto& e : evals) {
        bool at_chance;
        double margin;
        if (e.metric_kind == MetricKind::auc) {
            margin = std::fabs(e.cv_metric - 0.5);
            at_chance = margin <= 0.02 + 1e-12;  // inclusive band edge
        } else {
            margin = e.cv_metric;
            at_chance = e.cv_metric <= 0.0;
        }
        worst_margin = std::max(worst_margin, margin);
        all_chance = all_chance && at_chance;
    }
    rep.measured_value = worst_margin;
    rep.triggered = all_chance;
    if (rep.triggered) rep.suppressed_artifact = "feature_importance_table";
    return rep;
}

std::string default_family_label(const std::string& name) {
    const auto pos = name.rfind('_');
    if (pos == std::string::npos || pos == 0) return name;
    return name.substr(0, pos);
}

ForestDedupResult gate_forest_dedup(std::vector<FamilyMember> candidates) {
    ForestDedupResult out;
    out.report.id = GateId::forest_dedup;
    out.report.threshold = 2.0;

    for (auto& m : candidates)
        if (m.family.empty()) m.family = default_family_label(m.name);

    std::map<std::string, std::vector<FamilyMember>> families;
    for (auto& m : candidates) families[m.family].push_back(m);

    std::size_t largest = 0;
    for (auto& [fam, members] : families) {
        largest = std::max(largest, members.size());
        std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) {
            if (std::fabs(a.rho) != std::fabs(b.rho)) return std::fabs(a.rho) > std::fabs(b.rho);
            return a.name < b.name;
        });
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < 2 ? out.kept : out.suppressed).push_back(members[i]);
    }
    out.report.measured_value = double(largest);
    out.report.triggered = largest > 2;
    if (out.report.triggered) out.report.suppressed_artifact = "forest_plot_members";
    return out;
}

}  // namespace biomark
