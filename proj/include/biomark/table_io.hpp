#pragma once

#include <string>
#include <vector>

#include "biomark/dataset.hpp"

namespace biomark {

// Declarative column-to-role mapping; any column not named here becomes a
// feature.
struct ColumnRoleConfig {
    std::string id_column;      // empty: synthesize one id per row
    std::string target_column;  // required
    TaskType task = TaskType::regression;
    std::vector<std::string> demographic_columns;
    std::vector<std::string> subgroup_columns;
    std::string group_column;  // empty: none
    std::vector<std::string> exclude_columns;
    std::vector<std::string> feature_columns;  // optional explicit whitelist
    char delimiter = ',';
};

// Delimited text with a header row.  Unparseable or non-finite numeric cells
// become missing markers; rows with a missing target are dropped and counted.
// Categorical demographics are one-hot encoded (reference level dropped).
Dataset load_table(const std::string& path, const ColumnRoleConfig& roles);

// Writes features + roles back out in the same format load_table reads.
void write_table(const Dataset& ds, const std::string& path, char delimiter = ',',
                 const std::string& id_name = "participant_id",
                 const std::string& target_name = "target",
                 const std::string& group_name = "wave");

}  // namespace biomark
