#pragma once

#include "pegasus/detectors/common.hpp"

namespace pegasus::detect {

struct LofParams {
    std::size_t k_neighbors = 20;
};

// Classic LOF (reachability-density ratio) with distance ties included in the
// neighborhood. Reachability distances are floored at 1e-12 so coincident
// points keep finite local densities rather than raising a degeneracy error.
AnomalyScores lof_scores(const Matrix& Z, const LofParams& params);

} // namespace pegasus::detect
