#include "biomark/table_io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "biomark/common.hpp"

namespace biomark {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delim)) out.push_back(cell);
    if (!line.empty() && line.back() == delim) out.push_back("");
    return out;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ')) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && s[b] == ' ') ++b;
    return s.substr(b);
}

// Empty, "NA", "NaN" and anything unparseable or non-finite all read as
// missing.
double parse_cell(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty() || s == "NA" || s == "NaN") return kMissing;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) return kMissing;
    return v;
}

bool column_is_numeric(const std::vector<std::string>& cells) {
    bool any_value = false;
    for (const auto& raw : cells) {
        const std::string s = trim(raw);
        if (s.empty() || s == "NA" || s == "NaN") continue;
        any_value = true;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) return false;
    }
    return any_value;
}

double observed_median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return is_missing(x); }), v.end());
    if (v.empty()) return kMissing;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

Dataset load_table(const std::string& path, const ColumnRoleConfig& roles) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);
    if (roles.target_column.empty()) throw ConfigError("no target column configured");

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty input file: " + path);
    std::vector<std::string> header = split_line(line, roles.delimiter);
    for (auto& h : header) h = trim(h);

    std::map<std::string, std::size_t> col_of;
    for (std::size_t i = 0; i < header.size(); ++i) col_of[header[i]] = i;

    auto require_column = [&](const std::string& name, const char* role) {
        if (!col_of.count(name))
            throw ConfigError(std::string("column named in config absent from header (") +
                              role + "): " + name);
    };
    require_column(roles.target_column, "target");
    if (!roles.id_column.empty()) require_column(roles.id_column, "id");
    if (!roles.group_column.empty()) require_column(roles.group_column, "group");
    for (const auto& c : roles.demographic_columns) require_column(c, "demographic");
    for (const auto& c : roles.subgroup_columns) require_column(c, "subgroup");
    for (const auto& c : roles.exclude_columns) require_column(c, "exclude");
    for (const auto& c : roles.feature_columns) require_column(c, "feature");

    std::vector<std::vector<std::string>> raw_rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_line(line, roles.delimiter);
        cells.resize(header.size());
        raw_rows.push_back(std::move(cells));
    }

    // Drop rows with a missing target before anything else.
    const std::size_t target_col = col_of[roles.target_column];
    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < raw_rows.size(); ++r)
        if (!is_missing(parse_cell(raw_rows[r][target_col]))) kept.push_back(r);
    const std::size_t dropped_target = raw_rows.size() - kept.size();
    if (kept.empty()) throw DataError("target column entirely missing: " + roles.target_column);

    Dataset ds(roles.task, kept.size());
    ds.set_n_dropped_missing_target(dropped_target);

    std::vector<double> target(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
        target[i] = parse_cell(raw_rows[kept[i]][target_col]);
    ds.set_target(std::move(target));

    std::vector<std::string> ids(kept.size());
    if (!roles.id_column.empty()) {
        const std::size_t c = col_of[roles.id_column];
        for (std::size_t i = 0; i < kept.size(); ++i) ids[i] = trim(raw_rows[kept[i]][c]);
    } else {
        for (std::size_t i = 0; i < kept.size(); ++i) ids[i] = "row" + std::to_string(i);
    }
    ds.set_participant_ids(std::move(ids));

    if (!roles.group_column.empty()) {
        const std::size_t c = col_of[roles.group_column];
        std::vector<std::string> g(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) g[i] = trim(raw_rows[kept[i]][c]);
        ds.set_group(std::move(g));
    }

    for (const auto& name : roles.subgroup_columns) {
        const std::size_t c = col_of[name];
        std::vector<std::string> v(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) v[i] = trim(raw_rows[kept[i]][c]);
        ds.add_subgroup(name, std::move(v));
    }

    // Demographics: numeric columns load directly (missing -> median);
    // categorical columns one-hot encode with the lexicographically first
    // level as reference.
    for (const auto& name : roles.demographic_columns) {
        const std::size_t c = col_of[name];
        std::vector<std::string> cells(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) cells[i] = raw_rows[kept[i]][c];
        if (column_is_numeric(cells)) {
            std::vector<double> v(kept.size());
            for (std::size_t i = 0; i < kept.size(); ++i) v[i] = parse_cell(cells[i]);
            const double med = observed_median(v);
            for (auto& x : v)
                if (is_missing(x)) x = med;
            ds.add_demographic(name, std::move(v));
        } else {
            std::set<std::string> levels;
            for (auto& s : cells) {
                s = trim(s);
                levels.insert(s);
            }
            bool first = true;
            for (const auto& level : levels) {
                if (first) {  // reference level
                    first = false;
                    continue;
                }
                std::vector<double> dummy(kept.size());
                for (std::size_t i = 0; i < kept.size(); ++i)
                    dummy[i] = cells[i] == level ? 1.0 : 0.0;
                ds.add_demographic(name + "=" + level, std::move(dummy));
            }
        }
    }

    // Everything not claimed by another role is a feature.
    std::set<std::string> non_feature{roles.target_column};
    if (!roles.id_column.empty()) non_feature.insert(roles.id_column);
    if (!roles.group_column.empty()) non_feature.insert(roles.group_column);
    for (const auto& c : roles.demographic_columns) non_feature.insert(c);
    for (const auto& c : roles.subgroup_columns) non_feature.insert(c);

    const std::set<std::string> excluded(roles.exclude_columns.begin(),
                                         roles.exclude_columns.end());
    const std::set<std::string> whitelist(roles.feature_columns.begin(),
                                          roles.feature_columns.end());

    for (const auto& name : header) {
        if (name.empty() || non_feature.count(name)) continue;
        if (!whitelist.empty() && !whitelist.count(name) && !excluded.count(name)) continue;
        const std::size_t c = col_of[name];
        std::vector<double> v(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) v[i] = parse_cell(raw_rows[kept[i]][c]);
        FeatureMeta meta;
        meta.kind = excluded.count(name) ? FeatureKind::excluded : FeatureKind::raw;
        ds.add_feature(name, std::move(v), std::move(meta));
    }

    ds.validate();
    return ds;
}

void write_table(const Dataset& ds, const std::string& path, char delimiter,
                 const std::string& id_name, const std::string& target_name,
                 const std::string& group_name) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open output file: " + path);

    out << id_name << delimiter << target_name;
    if (ds.has_group()) out << delimiter << group_name;
    for (const auto& [name, col] : ds.subgroups()) out << delimiter << name;
    for (const auto& name : ds.demographic_names()) out << delimiter << name;
    for (const auto& name : ds.feature_names()) out << delimiter << name;
    out << "\n";

    out.precision(17);
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        out << ds.participant_ids()[i] << delimiter << ds.target()[i];
        if (ds.has_group()) out << delimiter << ds.group()[i];
        for (const auto& [name, col] : ds.subgroups()) out << delimiter << col[i];
        for (const auto& name : ds.demographic_names())
            out << delimiter << ds.demographic(name)[i];
        for (const auto& name : ds.feature_names()) {
            const double v = ds.feature(name)[i];
            out << delimiter;
            if (is_missing(v))
                out << "NA";
            else
                out << v;
        }
        out << "\n";
    }
}

}  // namespace biomark
