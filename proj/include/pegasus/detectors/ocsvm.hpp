#pragma once

#include "pegasus/detectors/common.hpp"

namespace pegasus::detect {

struct OcsvmParams {
    double nu = 0.5;
    // RBF width; negative means the default 1/(M · mean feature variance).
    double gamma = -1.0;
    double tol = 1e-6;
    std::size_t max_iter = 10000000;
};

// ν-one-class SVM (RBF kernel), dual solved by SMO with maximal-violating-
// pair selection; stops when the KKT violation gap falls below tol. Scores
// are negated decision values (ρ − Σ αᵢ K(xᵢ, x)), so higher = more
// anomalous. Throws SolverDidNotConverge (reporting the achieved gap) when
// max_iter is exhausted.
AnomalyScores ocsvm_scores(const Matrix& Z, const OcsvmParams& params);

// Converged dual variables (Σα = 1, 0 ≤ αᵢ ≤ 1/(νn)); exposed for the QP
// oracle tests.
Vector ocsvm_dual(const Matrix& Z, const OcsvmParams& params);

} // namespace pegasus::detect
