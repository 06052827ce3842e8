#pragma once

#include <cstdint>

#include "pegasus/detectors/common.hpp"

namespace pegasus::detect {

struct IForestParams {
    std::size_t n_trees = 100;
    std::size_t subsample_size = 256;
    std::uint64_t seed = 0;
    // When set, all trees split only within the top-`subspace_size` features
    // ranked by excess kurtosis over the fit data.
    bool use_kurtosis_subspace = false;
    std::size_t subspace_size = 0;
};

// Average path-length adjustment c(m) (expected unsuccessful-search depth of
// a BST with m nodes); exposed because the score definition depends on it.
double iforest_c(std::size_t m);

// Score s(x) = 2^(−E[h(x)]/c(ψ)). Tree t is grown from a stream derived from
// the root seed with counter t, so results are bit-identical for any thread
// count.
AnomalyScores iforest_scores(const Matrix& Z, const IForestParams& params);

} // namespace pegasus::detect
