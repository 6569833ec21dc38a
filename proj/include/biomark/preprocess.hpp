#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biomark/dataset.hpp"

namespace biomark {

struct DropResult {
    Dataset ds;
    std::vector<std::string> dropped;  // for the fact sheet
};

// Drops features with missing_fraction strictly above the threshold.
DropResult drop_high_missingness(const Dataset& ds, double threshold = 0.70);

struct ImputeLog {
    std::vector<std::string> notes;
};

// Per-column median within each group (group column if present), global
// fallback for all-missing groups.  Throws naming any globally all-missing
// column.
Dataset impute_median(const Dataset& ds, ImputeLog* log = nullptr);

// Mean of the k nearest rows by Euclidean distance over mutually observed,
// column-standardized features; median fallback when no donor exists.
Dataset impute_knn(const Dataset& ds, std::size_t k = 5, ImputeLog* log = nullptr);

// Median-initialized least-squares round robin: each originally incomplete
// column is regressed on the others and its imputed cells refreshed, until
// `rounds` passes or max cell change < 1e-6.
Dataset impute_iterative(const Dataset& ds, std::size_t rounds = 10, ImputeLog* log = nullptr);

// One seeded random row per distinct participant, original row order kept.
Dataset dedup_one_per_participant(const Dataset& ds, std::uint64_t seed);

}  // namespace biomark
