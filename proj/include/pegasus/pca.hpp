#pragma once

#include <cstddef>

#include "pegasus/matrix.hpp"

namespace pegasus::manifold {

struct PcaModel {
    Vector mean;                      // D
    Matrix components;                // M×D, rows orthonormal, decreasing singular value
    Vector singular_values;           // M
    Vector explained_variance_ratio;  // M, fractions of the total variance

    std::size_t latent_dim() const { return components.rows(); }
    std::size_t input_dim() const { return components.cols(); }
};

// Fit target: an explicit latent dimension, or the smallest M whose
// cumulative explained variance reaches `variance`.
struct PcaTarget {
    static PcaTarget latent(std::size_t m) { return {m, 0.0, true}; }
    static PcaTarget variance(double v) { return {0, v, false}; }

    std::size_t m = 0;
    double v = 0.0;
    bool is_latent = false;
};

// Components are the leading eigenvectors of the centered covariance (equal
// to the top right-singular vectors of the centered data); the eigensolve is
// deterministic and component signs are fixed so fits are byte-stable.
PcaModel pca_fit(const Matrix& X, const PcaTarget& target);

Matrix pca_encode(const PcaModel& model, const Matrix& X);
Matrix pca_decode(const PcaModel& model, const Matrix& Z);

// Per-point MSE with 1/D normalization.
Vector pca_reconstruction_error(const PcaModel& model, const Matrix& X);

} // namespace pegasus::manifold
