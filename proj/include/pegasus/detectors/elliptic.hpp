#pragma once

#include <cstdint>

#include "pegasus/detectors/common.hpp"

namespace pegasus::detect {

struct EeParams {
    // h/n; negative means the default ⌊(n+M+1)/2⌋/n.
    double support_fraction = -1.0;
    std::size_t n_initial_subsets = 500;
    std::size_t n_c_steps = 100;
    std::uint64_t seed = 0;
};

// Robust location/scatter via FastMCD; scores are squared Mahalanobis
// distances to the consistency-corrected estimate. Initial candidates are
// exhaustive (all size-h subsets, else all elemental (M+1)-subsets) whenever
// the subset count fits within n_initial_subsets — with exhaustive size-h
// initialization the result is exactly the global MCD minimum, which the
// oracle tests rely on. Large n uses the standard staged search (seeded
// subsample for cheap C-steps, best candidates refined on the full data).
AnomalyScores ee_scores(const Matrix& Z, const EeParams& params);

// The raw (uncorrected, 1/h-normalized) MCD determinant found for Z — the
// quantity the exhaustive oracle checks.
double ee_mcd_determinant(const Matrix& Z, const EeParams& params);

} // namespace pegasus::detect
