#include "pegasus/detectors/knn.hpp"

#include <algorithm>
#include <cmath>

#include "pegasus/errors.hpp"

namespace pegasus::detect {

AnomalyScores knn_scores(const Matrix& Z, const KnnParams& params) {
    const std::size_t n = Z.rows();
    const std::size_t k = params.k_neighbors;
    if (k < 1) throw InvalidParams("knn_scores: k_neighbors must be ≥ 1");
    if (n <= k) throw TooFewPoints("knn_scores: need n > k_neighbors");

    using i64 = std::int64_t;
    Vector scores(n, 0.0);
#pragma omp parallel
    {
        Vector dists;
#pragma omp for schedule(static)
        for (i64 ii = 0; ii < static_cast<i64>(n); ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            dists.clear();
            dists.reserve(n - 1);
            const double* zi = Z.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double* zj = Z.row(j);
                double acc = 0.0;
                for (std::size_t l = 0; l < Z.cols(); ++l) {
                    const double d = zi[l] - zj[l];
                    acc += d * d;
                }
                dists.push_back(acc);
            }
            std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
            scores[i] = std::sqrt(dists[k - 1]);
        }
    }

    AnomalyScores out;
    out.detector_id = "knn";
    out.scores = std::move(scores);
    out.params = {{"k_neighbors", std::to_string(k)}};
    return out;
}

} // namespace pegasus::detect
