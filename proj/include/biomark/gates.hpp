#pragma once

#include <string>
#include <vector>

#include "biomark/matrix.hpp"
#include "biomark/model_eval.hpp"

namespace biomark {

enum class GateId { multicollinearity, performance, overfitting, ablation, forest_dedup };

const char* gate_name(GateId id);

struct QualityGateReport {
    GateId id;
    bool triggered = false;
    double measured_value = 0.0;
    double threshold = 0.0;
    std::string suppressed_artifact;
};

// (i) max VIF > 50 suppresses the coefficient table.
QualityGateReport gate_multicollinearity(const Matrix& final_model_design);

// (ii) CV AUC < 0.55 or CV R^2 < 0 suppresses the model results table.
QualityGateReport gate_performance(const ModelEval& eval);

// (iii) train/CV ratio > 5 (or CV <= 0 with train > 0) suppresses results.
QualityGateReport gate_overfitting(const ModelEval& eval);

// (iv) every model at chance (AUC within 0.5 +- 0.02, or R^2 <= 0)
// suppresses feature-importance artifacts.
QualityGateReport gate_ablation(const std::vector<ModelEval>& evals);

struct FamilyMember {
    std::string name;
    std::string family;
    double rho = 0.0;
};

struct ForestDedupResult {
    QualityGateReport report;
    std::vector<FamilyMember> kept;        // top-2 |rho| per family
    std::vector<FamilyMember> suppressed;  // flagged, not plotted
};

// (v) limits each feature family to its two strongest members for plotting.
ForestDedupResult gate_forest_dedup(std::vector<FamilyMember> candidates);

// Default family labeling: snake_case name minus its final token
// ("sleep_var_sd" -> "sleep_var"); explicit labels override this.
std::string default_family_label(const std::string& name);

}  // namespace biomark
