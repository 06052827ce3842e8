#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pegasus/matrix.hpp"

namespace pegasus::detect {

// Scores follow one convention everywhere: higher = more anomalous.
// Detectors whose native sign differs (OCSVM decision values) are negated on
// output. params echoes the hyperparameters and seed used.
struct AnomalyScores {
    std::string detector_id;
    Vector scores;
    std::vector<std::pair<std::string, std::string>> params;
};

struct FlagSet {
    std::vector<std::size_t> indices;  // sorted, unique, in range
    std::size_t k = 0;                 // requested budget
    std::string source;                // detector id or combination expression
    std::size_t n_points = 0;          // dataset size the flags refer to

    bool contains(std::size_t i) const;
};

// Indices of the k largest scores, ties broken by lower index. k > n flags
// everything.
FlagSet top_k_flags(const AnomalyScores& scores, std::size_t k);

// Set union; source records the combination expression (e.g. "lof ∪ re").
// Throws MixedDatasets when inputs disagree on the dataset size.
FlagSet combine_flags(const std::vector<FlagSet>& sets);

// Exact neighbor lists over rows of Z, excluding self, with distance ties
// included (|idx| ≥ k when ties straddle the k-th distance). Entries sorted
// by (distance, index). dist holds squared Euclidean distances;
// k_distance is the (unsquared) k-th neighbor distance.
struct NeighborList {
    std::vector<std::size_t> idx;
    std::vector<double> sqdist;
    double k_distance = 0.0;
};
std::vector<NeighborList> knn_with_ties(const Matrix& Z, std::size_t k);

// CSV: index,score,detector_id.
void save_scores_csv(const std::string& path, const AnomalyScores& s);
AnomalyScores load_scores_csv(const std::string& path);

// CSV: index,source. A `<path>.meta.json` sidecar records n_points/k/source
// and (when provided) the dataset hash so `combine` can detect mixed inputs.
void save_flags_csv(const std::string& path, const FlagSet& f, std::uint64_t dataset_hash = 0);
FlagSet load_flags_csv(const std::string& path);

} // namespace pegasus::detect
