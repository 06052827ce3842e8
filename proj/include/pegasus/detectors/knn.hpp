#pragma once

#include "pegasus/detectors/common.hpp"

namespace pegasus::detect {

struct KnnParams {
    std::size_t k_neighbors = 5;
};

// Score = Euclidean distance to the k-th nearest distinct-index neighbor
// (duplicates count as distance-0 neighbors).
AnomalyScores knn_scores(const Matrix& Z, const KnnParams& params);

} // namespace pegasus::detect
