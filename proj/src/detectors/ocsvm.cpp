#include "pegasus/detectors/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pegasus/errors.hpp"
#include "pegasus/kernels.hpp"
#include "pegasus/text.hpp"

namespace pegasus::detect {

namespace {

using i64 = std::int64_t;

double resolve_gamma(const Matrix& Z, double gamma) {
    if (gamma > 0.0) return gamma;
    const std::size_t n = Z.rows(), m = Z.cols();
    const Vector mean = kernels::col_mean(Z);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double lo = Z(0, j), hi = Z(0, j), acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = Z(i, j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            const double d = v - mean[j];
            acc += d * d;
        }
        // A constant column has variance exactly 0; the two-pass sum would
        // otherwise pick up rounding error from the mean.
        if (hi > lo) total += acc / static_cast<double>(n);
    }
    const double mean_var = total / static_cast<double>(m);
    if (!(mean_var > 0.0))
        throw InvalidParams("ocsvm_scores: default gamma undefined on zero-variance data");
    return 1.0 / (static_cast<double>(m) * mean_var);
}

struct Solved {
    Vector alpha;
    double rho = 0.0;
    double gamma = 0.0;
    double gap = 0.0;
};

Solved solve(const Matrix& Z, const OcsvmParams& params) {
    const std::size_t n = Z.rows();
    if (n < 2) throw TooFewPoints("ocsvm_scores: need at least 2 rows");
    if (!(params.nu > 0.0 && params.nu <= 1.0))
        throw InvalidParams("ocsvm_scores: nu must lie in (0, 1]");
    if (!(params.tol > 0.0)) throw InvalidParams("ocsvm_scores: tol must be positive");
    if (params.max_iter < 1) throw InvalidParams("ocsvm_scores: max_iter must be ≥ 1");

    const double gamma = resolve_gamma(Z, params.gamma);
    const double C = 1.0 / (params.nu * static_cast<double>(n));

    // Full RBF Gram matrix (n ≈ 7k ⇒ ~390 MB, chosen over recomputation).
    Matrix K = kernels::pairwise_sqdist(Z, Z);
    {
        double* p = K.data();
        const i64 sz = K.size();
#pragma omp parallel for schedule(static)
        for (i64 i = 0; i < sz; ++i) p[i] = std::exp(-gamma * p[i]);
    }

    // libsvm-style feasible start: Σα = 1 with α at the upper bound for the
    // first ⌊νn⌋ points.
    Vector alpha(n, 0.0);
    {
        double remaining = 1.0;
        for (std::size_t i = 0; i < n && remaining > 0.0; ++i) {
            alpha[i] = std::min(C, remaining);
            remaining -= alpha[i];
        }
    }

    // gradient of ½ αᵀKα
    Vector G(n, 0.0);
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < static_cast<i64>(n); ++i) {
        const double* k = K.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += alpha[j] * k[j];
        G[i] = acc;
    }

    double gap = std::numeric_limits<double>::infinity();
    std::size_t iter = 0;
    for (; iter < params.max_iter; ++iter) {
        // maximal violating pair: i can grow (α < C), j can shrink (α > 0)
        i64 bi = -1, bj = -1;
        double gmin = std::numeric_limits<double>::infinity();
        double gmax = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (alpha[t] < C && G[t] < gmin) {
                gmin = G[t];
                bi = static_cast<i64>(t);
            }
            if (alpha[t] > 0.0 && G[t] > gmax) {
                gmax = G[t];
                bj = static_cast<i64>(t);
            }
        }
        gap = gmax - gmin;
        if (bi < 0 || bj < 0 || gap <= params.tol) break;

        const std::size_t i = static_cast<std::size_t>(bi), j = static_cast<std::size_t>(bj);
        const double denom = std::max(1e-12, 2.0 - 2.0 * K(i, j));
        double t = (G[j] - G[i]) / denom;
        t = std::min(t, std::min(C - alpha[i], alpha[j]));
        alpha[i] += t;
        alpha[j] -= t;
        // keep bound membership exact against drift
        if (C - alpha[i] < 1e-15 * C) alpha[i] = C;
        if (alpha[j] < 1e-15 * C) alpha[j] = 0.0;

        const double* ki = K.row(i);
        const double* kj = K.row(j);
#pragma omp parallel for schedule(static)
        for (i64 u = 0; u < static_cast<i64>(n); ++u) G[u] += t * (ki[u] - kj[u]);
    }
    if (gap > params.tol && iter >= params.max_iter)
        throw SolverDidNotConverge("ocsvm_scores: SMO hit max_iter with violation gap " +
                                   format_double(gap) + " > tol " + format_double(params.tol));

    // ρ from free support vectors, else the violation interval midpoint
    double rho = 0.0;
    {
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (alpha[i] > 0.0 && alpha[i] < C) {
                acc += G[i];
                ++cnt;
            }
        if (cnt > 0) {
            rho = acc / static_cast<double>(cnt);
        } else {
            double gmin = std::numeric_limits<double>::infinity();
            double gmax = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                if (alpha[i] < C) gmin = std::min(gmin, G[i]);
                if (alpha[i] > 0.0) gmax = std::max(gmax, G[i]);
            }
            if (!std::isfinite(gmin))
                rho = gmax;  // ν = 1: every α is at the bound
            else if (!std::isfinite(gmax))
                rho = gmin;
            else
                rho = 0.5 * (gmin + gmax);
        }
    }

    Solved out;
    out.alpha = std::move(alpha);
    out.rho = rho;
    out.gamma = gamma;
    out.gap = gap;
    return out;
}

} // namespace

Vector ocsvm_dual(const Matrix& Z, const OcsvmParams& params) {
    return solve(Z, params).alpha;
}

AnomalyScores ocsvm_scores(const Matrix& Z, const OcsvmParams& params) {
    const Solved s = solve(Z, params);
    const std::size_t n = Z.rows();

    // support vectors only, in index order
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n; ++i)
        if (s.alpha[i] > 0.0) sv.push_back(i);

    Vector scores(n, 0.0);
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < static_cast<i64>(n); ++i) {
        const double* zi = Z.row(i);
        double f = 0.0;
        for (std::size_t v : sv) {
            const double* zv = Z.row(v);
            double d2 = 0.0;
            for (std::size_t l = 0; l < Z.cols(); ++l) {
                const double d = zi[l] - zv[l];
                d2 += d * d;
            }
            f += s.alpha[v] * std::exp(-s.gamma * d2);
        }
        scores[i] = s.rho - f;  // negated decision value
    }

    AnomalyScores out;
    out.detector_id = "ocsvm";
    out.scores = std::move(scores);
    out.params = {{"nu", format_double(params.nu)},
                  {"gamma", format_double(s.gamma)},
                  {"tol", format_double(params.tol)},
                  {"max_iter", std::to_string(params.max_iter)}};
    return out;
}

} // namespace pegasus::detect
