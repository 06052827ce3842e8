#include "pegasus/detectors/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pegasus/errors.hpp"
#include "pegasus/rng.hpp"
#include "pegasus/text.hpp"

namespace pegasus::detect {

namespace {

constexpr double kEulerGamma = 0.5772156649015329;

struct Node {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    std::int32_t left = -1, right = -1;
    std::uint32_t size = 0;
};

struct Tree {
    std::vector<Node> nodes;
};

// Grows one tree over Z rows `rows[lo..hi)` restricted to `features`.
struct TreeBuilder {
    const Matrix& Z;
    const std::vector<std::size_t>& features;
    Rng rng;
    std::size_t height_limit;
    Tree tree;

    std::int32_t build(std::vector<std::size_t>& rows, std::size_t lo, std::size_t hi,
                       std::size_t depth) {
        const std::size_t count = hi - lo;
        const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[id].size = static_cast<std::uint32_t>(count);
        if (count <= 1 || depth >= height_limit) return id;

        // split candidates: features non-constant over this node
        std::vector<std::size_t> cand;
        std::vector<std::pair<double, double>> ranges;
        for (std::size_t f : features) {
            double mn = Z(rows[lo], f), mx = mn;
            for (std::size_t r = lo + 1; r < hi; ++r) {
                const double v = Z(rows[r], f);
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            if (mx > mn) {
                cand.push_back(f);
                ranges.emplace_back(mn, mx);
            }
        }
        if (cand.empty()) return id;

        const std::size_t pick = rng.uniform_int(cand.size());
        const std::size_t f = cand[pick];
        const auto [mn, mx] = ranges[pick];
        const double split = rng.uniform(mn, mx);

        // stable partition keeps row order deterministic
        const auto mid = std::stable_partition(
            rows.begin() + lo, rows.begin() + hi,
            [&](std::size_t r) { return Z(r, f) < split; });
        const std::size_t m = static_cast<std::size_t>(mid - rows.begin());
        if (m == lo || m == hi) return id;  // degenerate split (split == mn)

        tree.nodes[id].feature = static_cast<int>(f);
        tree.nodes[id].threshold = split;
        const std::int32_t l = build(rows, lo, m, depth + 1);
        tree.nodes[id].left = l;
        const std::int32_t r = build(rows, m, hi, depth + 1);
        tree.nodes[id].right = r;
        return id;
    }
};

double path_length(const Tree& t, const double* z) {
    std::int32_t cur = 0;
    double depth = 0.0;
    for (;;) {
        const Node& nd = t.nodes[cur];
        if (nd.feature < 0) return depth + iforest_c(nd.size);
        cur = z[nd.feature] < nd.threshold ? nd.left : nd.right;
        depth += 1.0;
    }
}

} // namespace

double iforest_c(std::size_t m) {
    if (m <= 1) return 0.0;
    if (m == 2) return 1.0;
    const double d = static_cast<double>(m);
    const double harmonic = std::log(d - 1.0) + kEulerGamma;
    return 2.0 * harmonic - 2.0 * (d - 1.0) / d;
}

AnomalyScores iforest_scores(const Matrix& Z, const IForestParams& params) {
    const std::size_t n = Z.rows(), d = Z.cols();
    if (params.n_trees < 1) throw InvalidParams("iforest_scores: n_trees must be ≥ 1");
    if (params.subsample_size < 2)
        throw InvalidParams("iforest_scores: subsample_size must be ≥ 2");
    if (n < 2) throw TooFewPoints("iforest_scores: need at least 2 rows");

    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), std::size_t{0});
    if (params.use_kurtosis_subspace) {
        if (params.subspace_size < 1 || params.subspace_size > d)
            throw InvalidParams("iforest_scores: subspace_size must lie in [1, M]");
        // rank features by excess kurtosis; zero-variance features rank last
        Vector kurt(d, -std::numeric_limits<double>::infinity());
        for (std::size_t f = 0; f < d; ++f) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += Z(i, f);
            mean /= static_cast<double>(n);
            double m2 = 0.0, m4 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dv = Z(i, f) - mean;
                m2 += dv * dv;
                m4 += dv * dv * dv * dv;
            }
            m2 /= static_cast<double>(n);
            m4 /= static_cast<double>(n);
            if (m2 > 0.0) kurt[f] = m4 / (m2 * m2) - 3.0;
        }
        std::stable_sort(features.begin(), features.end(),
                         [&kurt](std::size_t a, std::size_t b) { return kurt[a] > kurt[b]; });
        features.resize(params.subspace_size);
        std::sort(features.begin(), features.end());
    }

    const std::size_t psi = std::min(params.subsample_size, n);
    const std::size_t height_limit =
        static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(psi))));
    const double c_psi = iforest_c(psi);

    using i64 = std::int64_t;
    const Rng root(params.seed);
    std::vector<Tree> trees(params.n_trees);
#pragma omp parallel for schedule(static)
    for (i64 t = 0; t < static_cast<i64>(params.n_trees); ++t) {
        Rng tree_rng = root.derive(static_cast<std::uint64_t>(t));
        auto rows = tree_rng.sample_without_replacement(n, psi);
        TreeBuilder builder{Z, features, tree_rng.derive(1), height_limit, {}};
        builder.build(rows, 0, rows.size(), 0);
        trees[t] = std::move(builder.tree);
    }

    Vector scores(n, 0.0);
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < static_cast<i64>(n); ++i) {
        double acc = 0.0;
        for (const Tree& t : trees) acc += path_length(t, Z.row(i));
        const double mean_path = acc / static_cast<double>(params.n_trees);
        scores[i] = std::pow(2.0, -mean_path / c_psi);
    }

    AnomalyScores out;
    out.detector_id = "iforest";
    out.scores = std::move(scores);
    out.params = {{"n_trees", std::to_string(params.n_trees)},
                  {"subsample_size", std::to_string(params.subsample_size)},
                  {"seed", std::to_string(params.seed)},
                  {"use_kurtosis_subspace", params.use_kurtosis_subspace ? "true" : "false"},
                  {"subspace_size", std::to_string(params.subspace_size)}};
    return out;
}

} // namespace pegasus::detect
