#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "biomark/dataset.hpp"

namespace biomark {

struct LeakageConfig {
    std::string target_name = "target";
    std::vector<std::string> excluded_proxies;
    double overlap_threshold = 0.85;
    double confirmation_fraction = 0.30;
    std::size_t min_confirmation_n = 20;
};

struct FoldAssignment {
    std::vector<int> fold_of_row;
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;  // e.g. a stratum smaller than k
};

struct ExclusionReport {
    Dataset ds;
    std::vector<std::string> excluded;        // proxies actually found and marked
    std::vector<std::string> missing_proxies; // configured but absent, warned
};

// Marks configured proxies kind=excluded; they stay readable for overlap
// scanning but never enumerate as candidates.
ExclusionReport exclude_target_and_proxies(const Dataset& ds, const LeakageConfig& cfg);

struct OverlapFlag {
    std::string candidate;
    std::string excluded_variable;  // "<target>" for the target itself
    double rho = 0.0;
};

struct OverlapScan {
    std::vector<std::string> retained;
    std::vector<OverlapFlag> flagged;        // removed, |rho| > threshold
    std::vector<OverlapFlag> near_threshold; // retained, |rho| in [0.80, threshold]
};

// Spearman of every candidate against the target and all excluded columns;
// removal on strict |rho| > threshold.
OverlapScan construct_overlap_scan(const Dataset& ds,
                                   const std::vector<std::string>& candidates,
                                   const LeakageConfig& cfg);

struct Split {
    Dataset discovery;
    Dataset confirmation;  // one row per participant
};

// Participant-level split: ceil(fraction * unique participants) go to the
// confirmation side, deduplicated to one row each; everyone else keeps all
// rows in discovery.
Split discovery_confirmation_split(const Dataset& ds, const LeakageConfig& cfg,
                                   std::uint64_t seed);

// Participants are stratified (class for classification, quartile of the
// participant-mean target for regression) and dealt round-robin; all of a
// participant's rows share its fold.
FoldAssignment stratified_participant_kfold(const Dataset& ds, int k, std::uint64_t seed);

struct ClusterMap {
    std::vector<std::string> representatives;
    std::map<std::string, std::vector<std::string>> satellites;  // rep -> members
};

struct ClusterInput {
    std::string name;
    double effect = 0.0;  // |effect| orders the greedy pass
    const std::vector<double>* values = nullptr;
};

// Greedy clustering in descending |effect| (ties by name): a candidate joins
// the first representative with |spearman| > threshold, else founds its own
// cluster.
ClusterMap intra_cluster_dedup(const std::vector<ClusterInput>& candidates,
                               double threshold = 0.85);

}  // namespace biomark
