#include "biomark/dataset.hpp"

#include <algorithm>
#include <set>

#include "biomark/common.hpp"

namespace biomark {

void Dataset::set_target(std::vector<double> t) {
    if (t.size() != n_rows_) throw DataError("target length != n_rows");
    target_ = std::move(t);
}

void Dataset::set_participant_ids(std::vector<std::string> ids) {
    if (ids.size() != n_rows_) throw DataError("participant_id length != n_rows");
    participant_id_ = std::move(ids);
}

std::vector<std::string> Dataset::unique_participants() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& id : participant_id_)
        if (seen.insert(id).second) out.push_back(id);
    return out;
}

std::unordered_map<std::string, std::vector<std::size_t>> Dataset::rows_by_participant() const {
    std::unordered_map<std::string, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < participant_id_.size(); ++i)
        out[participant_id_[i]].push_back(i);
    return out;
}

std::vector<std::string> Dataset::candidate_names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < feature_names_.size(); ++i)
        if (meta_[i].kind != FeatureKind::excluded) out.push_back(feature_names_[i]);
    return out;
}

bool Dataset::has_feature(const std::string& name) const {
    return feature_lookup_.count(name) > 0;
}

std::size_t Dataset::feature_index(const std::string& name) const {
    auto it = feature_lookup_.find(name);
    if (it == feature_lookup_.end()) throw DataError("unknown feature: " + name);
    return it->second;
}

const std::vector<double>& Dataset::feature(const std::string& name) const {
    return feature_cols_[feature_index(name)];
}

const FeatureMeta& Dataset::meta(const std::string& name) const {
    return meta_[feature_index(name)];
}

void Dataset::add_feature(const std::string& name, std::vector<double> values,
                          FeatureMeta meta) {
    if (values.size() != n_rows_) throw DataError("feature " + name + " length != n_rows");
    if (has_feature(name)) throw DataError("duplicate feature: " + name);
    meta.name = name;
    meta.missing_fraction = missing_fraction(values);
    feature_lookup_[name] = feature_names_.size();
    feature_names_.push_back(name);
    feature_cols_.push_back(std::move(values));
    meta_.push_back(std::move(meta));
}

void Dataset::set_feature_values(const std::string& name, std::vector<double> values) {
    if (values.size() != n_rows_) throw DataError("feature " + name + " length != n_rows");
    const std::size_t i = feature_index(name);
    meta_[i].missing_fraction = missing_fraction(values);
    feature_cols_[i] = std::move(values);
}

void Dataset::set_feature_kind(const std::string& name, FeatureKind kind) {
    meta_[feature_index(name)].kind = kind;
}

void Dataset::set_feature_components(const std::string& name,
                                     std::vector<std::string> components) {
    for (const auto& c : components)
        if (!has_feature(c)) throw DataError("component refers to unknown column: " + c);
    meta_[feature_index(name)].components = std::move(components);
}

void Dataset::remove_feature(const std::string& name) {
    const std::size_t i = feature_index(name);
    feature_names_.erase(feature_names_.begin() + long(i));
    feature_cols_.erase(feature_cols_.begin() + long(i));
    meta_.erase(meta_.begin() + long(i));
    feature_lookup_.clear();
    for (std::size_t j = 0; j < feature_names_.size(); ++j) feature_lookup_[feature_names_[j]] = j;
}

const std::vector<double>& Dataset::demographic(const std::string& name) const {
    for (std::size_t i = 0; i < demographic_names_.size(); ++i)
        if (demographic_names_[i] == name) return demographic_cols_[i];
    throw DataError("unknown demographic: " + name);
}

void Dataset::add_demographic(const std::string& name, std::vector<double> values) {
    if (values.size() != n_rows_) throw DataError("demographic " + name + " length != n_rows");
    demographic_names_.push_back(name);
    demographic_cols_.push_back(std::move(values));
}

Matrix Dataset::demographics_matrix() const {
    if (demographic_cols_.empty()) return Matrix(n_rows_, 0);
    return Matrix::from_columns(demographic_cols_);
}

void Dataset::add_subgroup(const std::string& name, std::vector<std::string> values) {
    if (values.size() != n_rows_) throw DataError("subgroup " + name + " length != n_rows");
    subgroup_cols_[name] = std::move(values);
}

const std::vector<std::string>& Dataset::group() const {
    if (!group_col_) throw DataError("dataset has no group column");
    return *group_col_;
}

void Dataset::set_group(std::vector<std::string> values) {
    if (values.size() != n_rows_) throw DataError("group length != n_rows");
    group_col_ = std::move(values);
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
    for (std::size_t r : rows)
        if (r >= n_rows_) throw DataError("select_rows: index out of range");

    Dataset out(task_, rows.size());
    if (!target_.empty()) {
        std::vector<double> t(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) t[i] = target_[rows[i]];
        out.set_target(std::move(t));
    }
    if (!participant_id_.empty()) {
        std::vector<std::string> ids(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) ids[i] = participant_id_[rows[i]];
        out.set_participant_ids(std::move(ids));
    }
    for (std::size_t f = 0; f < feature_names_.size(); ++f) {
        std::vector<double> v(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) v[i] = feature_cols_[f][rows[i]];
        FeatureMeta m = meta_[f];
        out.add_feature(feature_names_[f], std::move(v), std::move(m));
    }
    for (std::size_t d = 0; d < demographic_names_.size(); ++d) {
        std::vector<double> v(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) v[i] = demographic_cols_[d][rows[i]];
        out.add_demographic(demographic_names_[d], std::move(v));
    }
    for (const auto& [name, col] : subgroup_cols_) {
        std::vector<std::string> v(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) v[i] = col[rows[i]];
        out.add_subgroup(name, std::move(v));
    }
    if (group_col_) {
        std::vector<std::string> v(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) v[i] = (*group_col_)[rows[i]];
        out.set_group(std::move(v));
    }
    out.n_dropped_missing_target_ = n_dropped_missing_target_;
    return out;
}

void Dataset::validate() const {
    if (!target_.empty()) {
        if (target_.size() != n_rows_) throw DataError("target length mismatch");
        for (double v : target_)
            if (is_missing(v)) throw DataError("target contains missing values");
        if (task_ == TaskType::classification) {
            std::set<double> distinct(target_.begin(), target_.end());
            if (distinct.size() != 2)
                throw DataError("classification target must take exactly two values");
        }
    }
    for (std::size_t f = 0; f < feature_cols_.size(); ++f)
        if (feature_cols_[f].size() != n_rows_)
            throw DataError("feature " + feature_names_[f] + " length mismatch");
    for (const auto& m : meta_)
        for (const auto& c : m.components)
            if (!has_feature(c)) throw DataError("missing component column: " + c);
}

}  // namespace biomark
