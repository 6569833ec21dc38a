#include "biomark/firewall.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "biomark/common.hpp"
#include "biomark/correlation.hpp"
#include "biomark/preprocess.hpp"
#include "biomark/rng.hpp"

namespace biomark {

ExclusionReport exclude_target_and_proxies(const Dataset& ds, const LeakageConfig& cfg) {
    ExclusionReport out{ds, {}, {}};
    for (const auto& proxy : cfg.excluded_proxies) {
        if (!out.ds.has_feature(proxy)) {
            out.missing_proxies.push_back(proxy);
            continue;
        }
        out.ds.set_feature_kind(proxy, FeatureKind::excluded);
        out.excluded.push_back(proxy);
    }
    return out;
}

namespace {

// Spearman on rows observed in both vectors; 0 when undefined.
double overlap_rho(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (is_missing(a[i]) || is_missing(b[i])) continue;
        x.push_back(a[i]);
        y.push_back(b[i]);
    }
    if (x.size() < 3) return 0.0;
    try {
        return spearman(x, y).estimate;
    } catch (const DataError&) {
        return 0.0;  // constant on the overlap
    }
}

}  // namespace

OverlapScan construct_overlap_scan(const Dataset& ds,
                                   const std::vector<std::string>& candidates,
                                   const LeakageConfig& cfg) {
    // Excluded set: the target plus every excluded-kind column.
    std::vector<std::pair<std::string, const std::vector<double>*>> excluded;
    excluded.emplace_back("<target>", &ds.target());
    for (const auto& name : ds.feature_names())
        if (ds.meta(name).kind == FeatureKind::excluded)
            excluded.emplace_back(name, &ds.feature(name));

    OverlapScan out;
    for (const auto& cand : candidates) {
        const auto& values = ds.feature(cand);
        bool removed = false;
        for (const auto& [ex_name, ex_values] : excluded) {
            const double rho = overlap_rho(values, *ex_values);
            if (std::fabs(rho) > cfg.overlap_threshold) {
                out.flagged.push_back({cand, ex_name, rho});
                removed = true;
                break;
            }
            if (std::fabs(rho) >= 0.80)
                out.near_threshold.push_back({cand, ex_name, rho});
        }
        if (!removed) out.retained.push_back(cand);
    }
    return out;
}

Split discovery_confirmation_split(const Dataset& ds, const LeakageConfig& cfg,
                                   std::uint64_t seed) {
    auto participants = ds.unique_participants();
    const std::size_t n_unique = participants.size();
    const std::size_t n_conf =
        std::size_t(std::ceil(cfg.confirmation_fraction * double(n_unique)));
    if (n_conf < cfg.min_confirmation_n)
        throw DataError(
            "discovery_confirmation_split: confirmation side would hold " +
            std::to_string(n_conf) + " participants (< " +
            std::to_string(cfg.min_confirmation_n) +
            "); replication check inapplicable at this cohort size");

    Rng rng(seed, "discovery-confirmation");
    rng.shuffle(participants);
    std::set<std::string> conf_ids(participants.begin(), participants.begin() + long(n_conf));

    std::vector<std::size_t> discovery_rows, confirmation_rows;
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        (conf_ids.count(ds.participant_ids()[i]) ? confirmation_rows : discovery_rows)
            .push_back(i);

    Split split{ds.select_rows(discovery_rows),
                dedup_one_per_participant(ds.select_rows(confirmation_rows), seed)};
    return split;
}

FoldAssignment stratified_participant_kfold(const Dataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw DataError("stratified_participant_kfold: needs k >= 2");
    const auto participants = ds.unique_participants();
    if (participants.size() < std::size_t(k))
        throw DataError("stratified_participant_kfold: fewer participants than folds");
    const auto rows_of = ds.rows_by_participant();

    // Stratum per participant: class for classification, quartile of the
    // participant-mean target for regression.
    std::vector<double> level(participants.size());
    for (std::size_t p = 0; p < participants.size(); ++p) {
        const auto& rows = rows_of.at(participants[p]);
        double mean = 0.0;
        for (std::size_t r : rows) mean += ds.target()[r];
        level[p] = mean / double(rows.size());
    }

    std::vector<int> stratum(participants.size());
    if (ds.task_type() == TaskType::classification) {
        for (std::size_t p = 0; p < participants.size(); ++p)
            stratum[p] = level[p] >= 0.5 ? 1 : 0;  // majority class of the participant
    } else {
        std::vector<double> sorted = level;
        std::sort(sorted.begin(), sorted.end());
        const double q1 = sorted[sorted.size() / 4];
        const double q2 = sorted[sorted.size() / 2];
        const double q3 = sorted[(3 * sorted.size()) / 4];
        for (std::size_t p = 0; p < participants.size(); ++p)
            stratum[p] = level[p] <= q1 ? 0 : (level[p] <= q2 ? 1 : (level[p] <= q3 ? 2 : 3));
    }

    // Shuffle participants inside each stratum, then deal round-robin with a
    // fold counter carried across strata so fold sizes stay balanced.
    std::map<int, std::vector<std::size_t>> by_stratum;
    for (std::size_t p = 0; p < participants.size(); ++p) by_stratum[stratum[p]].push_back(p);

    FoldAssignment fa;
    fa.k = k;
    fa.seed = seed;
    fa.fold_of_row.assign(ds.n_rows(), -1);
    int next_fold = 0;
    for (auto& [s, members] : by_stratum) {
        if (members.size() < std::size_t(k))
            fa.warnings.push_back("stratum " + std::to_string(s) + " holds only " +
                                  std::to_string(members.size()) +
                                  " participants; stratification is best-effort");
        Rng rng(seed, "kfold-stratum", std::to_string(s));
        rng.shuffle(members);
        for (std::size_t m : members) {
            for (std::size_t r : rows_of.at(participants[m])) fa.fold_of_row[r] = next_fold;
            next_fold = (next_fold + 1) % k;
        }
    }
    for (int f : fa.fold_of_row)
        if (f < 0) throw DataError("stratified_participant_kfold: unassigned row");
    return fa;
}

ClusterMap intra_cluster_dedup(const std::vector<ClusterInput>& candidates, double threshold) {
    if (candidates.empty()) throw DataError("intra_cluster_dedup: empty candidate list");
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ea = std::fabs(candidates[a].effect), eb = std::fabs(candidates[b].effect);
        if (ea != eb) return ea > eb;
        return candidates[a].name < candidates[b].name;
    });

    ClusterMap out;
    std::vector<std::size_t> rep_idx;
    for (std::size_t o : order) {
        bool joined = false;
        for (std::size_t r = 0; r < rep_idx.size() && !joined; ++r) {
            const double rho =
                overlap_rho(*candidates[o].values, *candidates[rep_idx[r]].values);
            if (std::fabs(rho) > threshold) {
                out.satellites[out.representatives[r]].push_back(candidates[o].name);
                joined = true;
            }
        }
        if (!joined) {
            rep_idx.push_back(o);
            out.representatives.push_back(candidates[o].name);
            out.satellites[candidates[o].name];  // ensure the key exists
        }
    }
    return out;
}

}  // namespace biomark
