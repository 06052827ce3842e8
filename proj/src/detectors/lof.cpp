#include "pegasus/detectors/lof.hpp"

#include <algorithm>
#include <cmath>

#include "pegasus/errors.hpp"
#include "pegasus/text.hpp"

namespace pegasus::detect {

AnomalyScores lof_scores(const Matrix& Z, const LofParams& params) {
    const std::size_t n = Z.rows();
    const std::size_t k = params.k_neighbors;
    if (k < 1) throw InvalidParams("lof_scores: k_neighbors must be ≥ 1");
    if (n <= k) throw TooFewPoints("lof_scores: need n > k_neighbors");

    const auto nb = knn_with_ties(Z, k);
    constexpr double kEps = 1e-12;

    using i64 = std::int64_t;
    Vector lrd(n, 0.0);
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < static_cast<i64>(n); ++i) {
        double acc = 0.0;
        for (std::size_t t = 0; t < nb[i].idx.size(); ++t) {
            const std::size_t o = nb[i].idx[t];
            const double d = std::sqrt(nb[i].sqdist[t]);
            acc += std::max(kEps, std::max(nb[o].k_distance, d));
        }
        lrd[i] = static_cast<double>(nb[i].idx.size()) / acc;
    }

    Vector lof(n, 0.0);
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < static_cast<i64>(n); ++i) {
        double acc = 0.0;
        for (std::size_t o : nb[i].idx) acc += lrd[o];
        lof[i] = acc / (static_cast<double>(nb[i].idx.size()) * lrd[i]);
    }

    AnomalyScores out;
    out.detector_id = "lof";
    out.scores = std::move(lof);
    out.params = {{"k_neighbors", std::to_string(k)}};
    return out;
}

} // namespace pegasus::detect
