#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "biomark/matrix.hpp"

namespace biomark {

enum class TaskType { classification, regression };
enum class FeatureKind { raw, composite, excluded };

struct FeatureMeta {
    std::string name;
    FeatureKind kind = FeatureKind::raw;
    std::vector<std::string> components;  // non-empty iff composite
    double missing_fraction = 0.0;
};

// Column-oriented cohort table.  Operations treat a built Dataset as
// immutable and return modified copies; the mutating interface exists for
// loaders, generators, and those copies.
class Dataset {
  public:
    Dataset() = default;
    Dataset(TaskType task, std::size_t n_rows) : task_(task), n_rows_(n_rows) {}

    std::size_t n_rows() const { return n_rows_; }
    TaskType task_type() const { return task_; }

    const std::vector<double>& target() const { return target_; }
    void set_target(std::vector<double> t);

    const std::vector<std::string>& participant_ids() const { return participant_id_; }
    void set_participant_ids(std::vector<std::string> ids);
    std::vector<std::string> unique_participants() const;  // first-appearance order
    std::unordered_map<std::string, std::vector<std::size_t>> rows_by_participant() const;

    std::size_t n_features() const { return feature_names_.size(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    std::vector<std::string> candidate_names() const;  // skips kind == excluded
    bool has_feature(const std::string& name) const;
    const std::vector<double>& feature(const std::string& name) const;
    const FeatureMeta& meta(const std::string& name) const;

    void add_feature(const std::string& name, std::vector<double> values,
                     FeatureMeta meta = {});
    void set_feature_values(const std::string& name, std::vector<double> values);
    void set_feature_kind(const std::string& name, FeatureKind kind);
    void set_feature_components(const std::string& name, std::vector<std::string> components);
    void remove_feature(const std::string& name);

    const std::vector<std::string>& demographic_names() const { return demographic_names_; }
    const std::vector<double>& demographic(const std::string& name) const;
    void add_demographic(const std::string& name, std::vector<double> values);
    Matrix demographics_matrix() const;

    const std::map<std::string, std::vector<std::string>>& subgroups() const {
        return subgroup_cols_;
    }
    void add_subgroup(const std::string& name, std::vector<std::string> values);

    bool has_group() const { return group_col_.has_value(); }
    const std::vector<std::string>& group() const;
    void set_group(std::vector<std::string> values);

    std::size_t n_dropped_missing_target() const { return n_dropped_missing_target_; }
    void set_n_dropped_missing_target(std::size_t n) { n_dropped_missing_target_ = n; }

    // Row subset preserving order of `rows`; missing fractions recomputed.
    Dataset select_rows(const std::vector<std::size_t>& rows) const;

    // Enforces the column-length and binary-classification invariants.
    void validate() const;

  private:
    std::size_t feature_index(const std::string& name) const;

    TaskType task_ = TaskType::regression;
    std::size_t n_rows_ = 0;

    std::vector<std::string> feature_names_;
    std::unordered_map<std::string, std::size_t> feature_lookup_;
    std::vector<std::vector<double>> feature_cols_;
    std::vector<FeatureMeta> meta_;

    std::vector<double> target_;
    std::vector<std::string> participant_id_;

    std::vector<std::string> demographic_names_;
    std::vector<std::vector<double>> demographic_cols_;

    std::map<std::string, std::vector<std::string>> subgroup_cols_;
    std::optional<std::vector<std::string>> group_col_;

    std::size_t n_dropped_missing_target_ = 0;
};

}  // namespace biomark
