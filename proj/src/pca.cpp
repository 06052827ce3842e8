#include "pegasus/pca.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "pegasus/errors.hpp"
#include "pegasus/kernels.hpp"

namespace pegasus::manifold {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

} // namespace

PcaModel pca_fit(const Matrix& X, const PcaTarget& target) {
    const std::size_t n = X.rows(), d = X.cols();
    if (n < 2) throw TooFewPoints("pca_fit: need at least 2 rows");
    const std::size_t max_m = std::min(n, d);
    if (target.is_latent) {
        if (target.m < 1 || target.m > max_m)
            throw InvalidTarget("pca_fit: latent dim must lie in [1, min(n,D)]");
    } else {
        if (!(target.v > 0.0 && target.v <= 1.0))
            throw InvalidTarget("pca_fit: variance target must lie in (0, 1]");
    }

    const Vector mean = kernels::col_mean(X);
    Matrix Xc = X;
    kernels::sub_row_inplace(Xc, mean);
    Matrix cov = kernels::matmul_at(Xc, Xc);
    const double scale = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < cov.size(); ++i) cov.data()[i] *= scale;

    Eigen::Map<const EigenRowMajor> C(cov.data(), d, d);
    Eigen::SelfAdjointEigenSolver<EigenRowMajor> solver(C);
    if (solver.info() != Eigen::Success)
        throw RuntimeError("pca_fit: eigensolver failed");

    // Eigen returns ascending eigenvalues; read them back to front.
    const auto& evals = solver.eigenvalues();
    const auto& evecs = solver.eigenvectors();
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) total += std::max(0.0, evals[i]);

    double mean_sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean_sq += mean[j] * mean[j];
    if (total <= 1e-24 * (1.0 + mean_sq))
        throw DegenerateData("pca_fit: total variance is zero");

    std::size_t m = target.m;
    if (!target.is_latent) {
        double cum = 0.0;
        m = max_m;
        for (std::size_t i = 0; i < max_m; ++i) {
            cum += std::max(0.0, evals[d - 1 - i]) / total;
            if (cum >= target.v - 1e-12) {
                m = i + 1;
                break;
            }
        }
    }

    PcaModel model;
    model.mean = mean;
    model.components = Matrix(m, d);
    model.singular_values.resize(m);
    model.explained_variance_ratio.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t src = d - 1 - i;
        const double lambda = std::max(0.0, evals[src]);
        model.singular_values[i] = std::sqrt(lambda * static_cast<double>(n - 1));
        model.explained_variance_ratio[i] = lambda / total;
        double* row = model.components.row(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = evecs(j, src);
        // Deterministic sign: the largest-|entry| coordinate is positive.
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j)
            if (std::abs(row[j]) > std::abs(row[arg])) arg = j;
        if (row[arg] < 0.0)
            for (std::size_t j = 0; j < d; ++j) row[j] = -row[j];
    }
    return model;
}

Matrix pca_encode(const PcaModel& model, const Matrix& X) {
    if (X.cols() != model.input_dim())
        throw ShapeMismatch("pca_encode: input width does not match the model");
    Matrix Xc = X;
    kernels::sub_row_inplace(Xc, model.mean);
    return kernels::matmul_bt(Xc, model.components);
}

Matrix pca_decode(const PcaModel& model, const Matrix& Z) {
    if (Z.cols() != model.latent_dim())
        throw ShapeMismatch("pca_decode: latent width does not match the model");
    Matrix Xhat = kernels::matmul(Z, model.components);
    kernels::add_row_inplace(Xhat, model.mean);
    return Xhat;
}

Vector pca_reconstruction_error(const PcaModel& model, const Matrix& X) {
    const Matrix Xhat = pca_decode(model, pca_encode(model, X));
    return kernels::row_mse(X, Xhat);
}

} // namespace pegasus::manifold
