#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oracles {

namespace {

double dist(const pegasus::Matrix& Z, std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t c = 0; c < Z.cols(); ++c) {
        const double d = Z(a, c) - Z(b, c);
        acc += d * d;
    }
    return std::sqrt(acc);
}

// det via Gaussian elimination with partial pivoting.
double det_inplace(std::vector<std::vector<double>> a) {
    const std::size_t m = a.size();
    double det = 1.0;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0.0) return 0.0;
        if (piv != col) {
            std::swap(a[piv], a[col]);
            det = -det;
        }
        det *= a[col][col];
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < m; ++c) a[r][c] -= f * a[col][c];
        }
    }
    return det;
}

double subset_cov_det(const pegasus::Matrix& Z, const std::vector<std::size_t>& idx) {
    const std::size_t m = Z.cols();
    const double h = static_cast<double>(idx.size());
    std::vector<double> mu(m, 0.0);
    for (std::size_t i : idx)
        for (std::size_t c = 0; c < m; ++c) mu[c] += Z(i, c);
    for (double& v : mu) v /= h;

    std::vector<std::vector<double>> cov(m, std::vector<double>(m, 0.0));
    for (std::size_t i : idx)
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c)
                cov[r][c] += (Z(i, r) - mu[r]) * (Z(i, c) - mu[c]);
    for (auto& row : cov)
        for (double& v : row) v /= h;
    return det_inplace(std::move(cov));
}

}  // namespace

pegasus::Vector brute_lof(const pegasus::Matrix& Z, std::size_t k) {
    const std::size_t n = Z.rows();
    if (k < 1 || n <= k) throw std::invalid_argument("brute_lof: need 1 ≤ k < n");

    // k-distance and tied neighborhoods, from sorted full distance lists.
    std::vector<double> kdist(n);
    std::vector<std::vector<std::size_t>> nbr(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> d;
        d.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d.push_back(dist(Z, i, j));
        std::vector<double> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        kdist[i] = sorted[k - 1];
        std::size_t t = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && d[t++] <= kdist[i]) nbr[i].push_back(j);
    }

    std::vector<double> lrd(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t o : nbr[i])
            acc += std::max(1e-12, std::max(kdist[o], dist(Z, i, o)));
        lrd[i] = static_cast<double>(nbr[i].size()) / acc;
    }

    pegasus::Vector lof(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t o : nbr[i]) acc += lrd[o];
        lof[i] = acc / (static_cast<double>(nbr[i].size()) * lrd[i]);
    }
    return lof;
}

double exhaustive_mcd_determinant(const pegasus::Matrix& Z, std::size_t h) {
    const std::size_t n = Z.rows();
    if (h < Z.cols() + 1 || h > n)
        throw std::invalid_argument("exhaustive_mcd_determinant: need cols+1 ≤ h ≤ n");

    std::vector<std::size_t> idx(h);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        best = std::min(best, subset_cov_det(Z, idx));
        // next combination in lexicographic order
        std::size_t p = h;
        while (p > 0 && idx[p - 1] == n - h + (p - 1)) --p;
        if (p == 0) break;
        ++idx[p - 1];
        for (std::size_t q = p; q < h; ++q) idx[q] = idx[q - 1] + 1;
    }
    return best;
}

std::vector<double> pgd_ocsvm_dual(const pegasus::Matrix& K, double C, std::size_t iters) {
    const std::size_t n = K.rows();
    if (K.cols() != n || C * static_cast<double>(n) < 1.0)
        throw std::invalid_argument("pgd_ocsvm_dual: bad kernel or infeasible C");

    // Lipschitz constant of the gradient via power iteration on K.
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lam = 1.0;
    for (int it = 0; it < 200; ++it) {
        std::vector<double> w(n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) w[r] += K(r, c) * v[c];
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        lam = norm;
        for (std::size_t r = 0; r < n; ++r) v[r] = w[r] / norm;
    }
    const double eta = 1.0 / lam;

    // Projection onto {0 ≤ x ≤ C, Σx = 1}: x_i = clip(y_i − t, 0, C) with t
    // found by bisection on the monotone sum.
    const auto project = [&](std::vector<double> y) {
        double lo = *std::min_element(y.begin(), y.end()) - C - 1.0;
        double hi = *std::max_element(y.begin(), y.end());
        for (int it = 0; it < 200; ++it) {
            const double t = 0.5 * (lo + hi);
            double s = 0.0;
            for (double yi : y) s += std::clamp(yi - t, 0.0, C);
            (s > 1.0 ? lo : hi) = t;
        }
        const double t = 0.5 * (lo + hi);
        for (double& yi : y) yi = std::clamp(yi - t, 0.0, C);
        return y;
    };

    std::vector<double> alpha(n, 1.0 / static_cast<double>(n));
    for (std::size_t it = 0; it < iters; ++it) {
        std::vector<double> g(n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) g[r] += K(r, c) * alpha[c];
        for (std::size_t r = 0; r < n; ++r) alpha[r] -= eta * g[r];
        alpha = project(std::move(alpha));
    }
    return alpha;
}

pegasus::manifold::AeGradients numeric_ae_gradients(const pegasus::manifold::AeModel& model,
                                                    const pegasus::Matrix& batch, double eps) {
    using pegasus::manifold::ae_loss;
    pegasus::manifold::AeGradients g;
    g.loss = ae_loss(model, batch);

    pegasus::manifold::AeModel probe = model;
    for (std::size_t l = 0; l < model.W.size(); ++l) {
        g.dW.emplace_back(model.W[l].rows(), model.W[l].cols());
        for (std::size_t r = 0; r < model.W[l].rows(); ++r)
            for (std::size_t c = 0; c < model.W[l].cols(); ++c) {
                const double save = probe.W[l](r, c);
                probe.W[l](r, c) = save + eps;
                const double up = ae_loss(probe, batch);
                probe.W[l](r, c) = save - eps;
                const double dn = ae_loss(probe, batch);
                probe.W[l](r, c) = save;
                g.dW[l](r, c) = (up - dn) / (2.0 * eps);
            }

        g.db.emplace_back(model.b[l].size(), 0.0);
        for (std::size_t r = 0; r < model.b[l].size(); ++r) {
            const double save = probe.b[l][r];
            probe.b[l][r] = save + eps;
            const double up = ae_loss(probe, batch);
            probe.b[l][r] = save - eps;
            const double dn = ae_loss(probe, batch);
            probe.b[l][r] = save;
            g.db[l][r] = (up - dn) / (2.0 * eps);
        }
    }
    return g;
}

}  // namespace oracles
