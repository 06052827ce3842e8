#include "pegasus/detectors/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "pegasus/errors.hpp"
#include "pegasus/rng.hpp"
#include "pegasus/stats.hpp"
#include "pegasus/text.hpp"

namespace pegasus::detect {

namespace {

using i64 = std::int64_t;

struct Estimate {
    Eigen::VectorXd mu;
    Eigen::LLT<Eigen::MatrixXd> chol;
    double logdet = std::numeric_limits<double>::infinity();
    bool ok = false;
};

// 1/h-normalized mean and covariance over the given rows.
Estimate fit_subset(const Matrix& Z, const std::vector<std::size_t>& rows) {
    const std::size_t m = Z.cols(), h = rows.size();
    Estimate est;
    est.mu = Eigen::VectorXd::Zero(m);
    for (std::size_t r : rows)
        est.mu += Eigen::Map<const Eigen::VectorXd>(Z.row(r), m);
    est.mu /= static_cast<double>(h);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t r : rows) {
        const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(Z.row(r), m) - est.mu;
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(h);

    est.chol.compute(cov);
    if (est.chol.info() != Eigen::Success) return est;
    double ld = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double l = est.chol.matrixLLT()(i, i);
        if (!(l > 0.0) || !std::isfinite(std::log(l))) return est;
        ld += 2.0 * std::log(l);
    }
    est.logdet = ld;
    est.ok = true;
    return est;
}

Vector mahalanobis_sq(const Matrix& Z, const Estimate& est) {
    const std::size_t n = Z.rows(), m = Z.cols();
    Vector d2(n, 0.0);
    const Eigen::MatrixXd L = est.chol.matrixL();
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < static_cast<i64>(n); ++i) {
        Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(Z.row(i), m) - est.mu;
        L.triangularView<Eigen::Lower>().solveInPlace(d);
        d2[i] = d.squaredNorm();
    }
    return d2;
}

std::vector<std::size_t> smallest_h(const Vector& d2, std::size_t h) {
    std::vector<std::size_t> order(d2.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + h, order.end(),
                      [&d2](std::size_t a, std::size_t b) {
                          return d2[a] != d2[b] ? d2[a] < d2[b] : a < b;
                      });
    order.resize(h);
    std::sort(order.begin(), order.end());
    return order;
}

struct McdResult {
    Estimate est;
    std::vector<std::size_t> support;
};

// C-steps from an initial estimate until the support stops changing (the
// determinant is non-increasing along the way). `steps` caps the iteration.
McdResult concentrate(const Matrix& Z, std::size_t h, Estimate est, std::size_t steps) {
    McdResult res;
    res.est = std::move(est);
    if (!res.est.ok) return res;
    for (std::size_t it = 0; it < steps; ++it) {
        const Vector d2 = mahalanobis_sq(Z, res.est);
        auto support = smallest_h(d2, h);
        Estimate next = fit_subset(Z, support);
        if (!next.ok) {
            // exact-fit degeneracy: h points on a lower-dimensional flat
            res.est = std::move(next);
            res.support = std::move(support);
            return res;
        }
        const bool same = support == res.support;
        res.support = std::move(support);
        const double gain = res.est.logdet - next.logdet;
        res.est = std::move(next);
        if (same || gain <= 1e-12) break;
    }
    return res;
}

double binom_capped(std::size_t n, std::size_t k, double cap) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        c *= static_cast<double>(n - i) / static_cast<double>(i + 1);
        if (c > cap) return cap + 1.0;
    }
    return c;
}

// Lexicographic combination enumeration.
bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// Elemental start: fit an (M+1)-subset, widening deterministically while the
// covariance is singular, then concentrate to the h best rows.
Estimate elemental_estimate(const Matrix& Z, std::vector<std::size_t> rows) {
    const std::size_t n = Z.rows();
    Estimate est = fit_subset(Z, rows);
    std::size_t extra = 0;
    while (!est.ok && rows.size() < n && extra < n) {
        // append the next row not already in the subset
        while (extra < n && std::find(rows.begin(), rows.end(), extra) != rows.end()) ++extra;
        if (extra >= n) break;
        rows.push_back(extra++);
        est = fit_subset(Z, rows);
    }
    return est;
}

struct Search {
    const Matrix& Z;
    std::size_t h;
    const EeParams& params;

    McdResult best;

    void consider(McdResult cand) {
        if (!cand.est.ok) return;
        if (!best.est.ok || cand.est.logdet < best.est.logdet) best = std::move(cand);
    }

    void run() {
        const std::size_t n = Z.rows(), m = Z.cols();
        const double cap = static_cast<double>(params.n_initial_subsets);

        if (binom_capped(n, h, cap) <= cap) {
            // exhaustive over all size-h subsets: exact global MCD
            std::vector<std::size_t> comb(h);
            std::iota(comb.begin(), comb.end(), std::size_t{0});
            do {
                consider(concentrate(Z, h, fit_subset(Z, comb), params.n_c_steps));
            } while (next_combination(comb, n));
            return;
        }
        if (binom_capped(n, m + 1, cap) <= cap) {
            std::vector<std::size_t> comb(m + 1);
            std::iota(comb.begin(), comb.end(), std::size_t{0});
            do {
                consider(concentrate(Z, h, elemental_estimate(Z, comb), params.n_c_steps));
            } while (next_combination(comb, n));
            return;
        }

        // standard staged FastMCD
        constexpr std::size_t kPhaseCap = 1500;
        const Rng root(params.seed);
        const bool staged = n > kPhaseCap;

        std::vector<std::size_t> pool(n);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        Matrix sub;
        std::vector<std::size_t> pool_map;
        std::size_t h_phase = h;
        const Matrix* phase_data = &Z;
        if (staged) {
            Rng sub_rng = root.derive(~std::uint64_t{0});
            pool_map = sub_rng.sample_without_replacement(n, kPhaseCap);
            std::sort(pool_map.begin(), pool_map.end());
            sub = Matrix(kPhaseCap, m);
            for (std::size_t i = 0; i < kPhaseCap; ++i)
                for (std::size_t j = 0; j < m; ++j) sub(i, j) = Z(pool_map[i], j);
            h_phase = std::max(m + 1, h * kPhaseCap / n);
            phase_data = &sub;
        }
        const std::size_t n_phase = phase_data->rows();

        // phase 1: short concentration from seeded elemental subsets
        struct Cand {
            double logdet = std::numeric_limits<double>::infinity();
            Estimate est;
        };
        std::vector<Cand> cands(params.n_initial_subsets);
#pragma omp parallel for schedule(static)
        for (i64 c = 0; c < static_cast<i64>(params.n_initial_subsets); ++c) {
            Rng rng = root.derive(static_cast<std::uint64_t>(c));
            auto rows = rng.sample_without_replacement(n_phase, m + 1);
            McdResult r = concentrate(*phase_data, h_phase, elemental_estimate(*phase_data, rows), 2);
            if (r.est.ok) {
                cands[c].logdet = r.est.logdet;
                cands[c].est = std::move(r.est);
            }
        }
        std::vector<std::size_t> order(cands.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&cands](std::size_t a, std::size_t b) {
            return cands[a].logdet != cands[b].logdet ? cands[a].logdet < cands[b].logdet
                                                      : a < b;
        });

        // phase 2: refine the best few on the full data to convergence
        const std::size_t keep = std::min<std::size_t>(10, order.size());
        for (std::size_t i = 0; i < keep; ++i) {
            const Cand& c = cands[order[i]];
            if (!c.est.ok) continue;
            consider(concentrate(Z, h, c.est, params.n_c_steps));
        }
    }
};

double chi2_median(std::size_t m) {
    const double d = static_cast<double>(m);
    const double t = 1.0 - 2.0 / (9.0 * d);
    return d * t * t * t;
}

McdResult run_mcd(const Matrix& Z, const EeParams& params) {
    const std::size_t n = Z.rows(), m = Z.cols();
    if (m < 1) throw InvalidParams("ee_scores: need at least one feature");
    if (n <= m) throw TooFewPoints("ee_scores: need n > M to estimate a covariance");
    if (params.n_initial_subsets < 1)
        throw InvalidParams("ee_scores: n_initial_subsets must be ≥ 1");
    if (params.n_c_steps < 1) throw InvalidParams("ee_scores: n_c_steps must be ≥ 1");

    std::size_t h;
    if (params.support_fraction < 0.0) {
        h = (n + m + 1) / 2;
    } else {
        if (!(params.support_fraction > 0.0 && params.support_fraction <= 1.0))
            throw InvalidParams("ee_scores: support_fraction must lie in (0, 1]");
        h = static_cast<std::size_t>(params.support_fraction * static_cast<double>(n));
    }
    if (h <= m)
        throw TooFewPoints("ee_scores: support size h must exceed the dimension M");
    h = std::min(h, n);

    Search search{Z, h, params, {}};
    search.run();
    if (!search.best.est.ok)
        throw SingularCovariance("ee_scores: covariance is singular on every candidate support");
    return std::move(search.best);
}

} // namespace

double ee_mcd_determinant(const Matrix& Z, const EeParams& params) {
    return std::exp(run_mcd(Z, params).est.logdet);
}

AnomalyScores ee_scores(const Matrix& Z, const EeParams& params) {
    const McdResult best = run_mcd(Z, params);

    Vector d2 = mahalanobis_sq(Z, best.est);
    const double med = quantile(d2, 0.5);
    const double correction = med / chi2_median(Z.cols());
    if (correction > 0.0)
        for (double& v : d2) v /= correction;

    AnomalyScores out;
    out.detector_id = "ee";
    out.scores = std::move(d2);
    out.params = {{"support_fraction",
                   params.support_fraction < 0.0 ? "default" : format_double(params.support_fraction)},
                  {"h", std::to_string(best.support.size())},
                  {"n_initial_subsets", std::to_string(params.n_initial_subsets)},
                  {"n_c_steps", std::to_string(params.n_c_steps)},
                  {"seed", std::to_string(params.seed)}};
    return out;
}

} // namespace pegasus::detect
