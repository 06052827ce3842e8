#include "pegasus/detectors/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "pegasus/errors.hpp"
#include "pegasus/text.hpp"

namespace pegasus::detect {

bool FlagSet::contains(std::size_t i) const {
    return std::binary_search(indices.begin(), indices.end(), i);
}

FlagSet top_k_flags(const AnomalyScores& scores, std::size_t k) {
    if (k < 1) throw InvalidParams("top_k_flags: k must be ≥ 1");
    const std::size_t n = scores.scores.size();
    for (double v : scores.scores)
        if (!std::isfinite(v)) throw InvalidParams("top_k_flags: scores must be finite");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& s = scores.scores;
    const std::size_t take = std::min(k, n);
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&s](std::size_t a, std::size_t b) {
                          return s[a] != s[b] ? s[a] > s[b] : a < b;
                      });
    order.resize(take);
    std::sort(order.begin(), order.end());

    FlagSet f;
    f.indices = std::move(order);
    f.k = k;
    f.source = scores.detector_id;
    f.n_points = n;
    return f;
}

FlagSet combine_flags(const std::vector<FlagSet>& sets) {
    if (sets.empty()) throw InvalidParams("combine_flags: need at least one flag set");
    std::size_t n_points = 0;
    for (const auto& s : sets)
        if (s.n_points) {
            if (n_points && s.n_points != n_points)
                throw MixedDatasets("combine_flags: flag sets refer to different dataset sizes");
            n_points = s.n_points;
        }

    std::set<std::size_t> u;
    std::string source;
    std::size_t k = 0;
    for (const auto& s : sets) {
        u.insert(s.indices.begin(), s.indices.end());
        if (!source.empty()) source += " ∪ ";
        source += s.source.empty() ? "?" : s.source;
        k = std::max(k, s.k);
    }
    FlagSet out;
    out.indices.assign(u.begin(), u.end());
    out.k = k;
    out.source = source;
    out.n_points = n_points;
    if (n_points && !out.indices.empty() && out.indices.back() >= n_points)
        throw IndexOutOfRange("combine_flags: flag index exceeds dataset size");
    return out;
}

std::vector<NeighborList> knn_with_ties(const Matrix& Z, std::size_t k) {
    const std::size_t n = Z.rows();
    if (n <= k) throw TooFewPoints("knn_with_ties: need n > k");
    std::vector<NeighborList> out(n);

#pragma omp parallel
    {
        std::vector<std::pair<double, std::size_t>> cand;
#pragma omp for schedule(static)
        for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            cand.clear();
            cand.reserve(n - 1);
            const double* zi = Z.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double* zj = Z.row(j);
                double acc = 0.0;
                for (std::size_t l = 0; l < Z.cols(); ++l) {
                    const double d = zi[l] - zj[l];
                    acc += d * d;
                }
                cand.emplace_back(acc, j);
            }
            std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end());
            const double kth = cand[k - 1].first;

            NeighborList& nl = out[i];
            for (const auto& [d, j] : cand)
                if (d <= kth) {
                    nl.idx.push_back(j);
                    nl.sqdist.push_back(d);
                }
            // canonical (distance, index) order for determinism
            std::vector<std::size_t> ord(nl.idx.size());
            std::iota(ord.begin(), ord.end(), std::size_t{0});
            std::sort(ord.begin(), ord.end(), [&nl](std::size_t a, std::size_t b) {
                return nl.sqdist[a] != nl.sqdist[b] ? nl.sqdist[a] < nl.sqdist[b]
                                                    : nl.idx[a] < nl.idx[b];
            });
            NeighborList sorted;
            sorted.idx.reserve(ord.size());
            sorted.sqdist.reserve(ord.size());
            for (std::size_t o : ord) {
                sorted.idx.push_back(nl.idx[o]);
                sorted.sqdist.push_back(nl.sqdist[o]);
            }
            sorted.k_distance = std::sqrt(kth);
            out[i] = std::move(sorted);
        }
    }
    return out;
}

void save_scores_csv(const std::string& path, const AnomalyScores& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("save_scores_csv: cannot write " + path);
    f << "index,score,detector_id\n";
    for (std::size_t i = 0; i < s.scores.size(); ++i)
        f << i << ',' << format_double(s.scores[i]) << ',' << s.detector_id << "\n";
    if (!f) throw IoError("save_scores_csv: write failed for " + path);
}

AnomalyScores load_scores_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_scores_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || trim(line) != "index,score,detector_id")
        throw BadMagic("load_scores_csv: unexpected header in " + path);
    AnomalyScores out;
    std::size_t expect = 0;
    while (std::getline(f, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() != 3) throw DimensionMismatch("load_scores_csv: bad row in " + path);
        if (static_cast<std::size_t>(parse_int(cells[0], "load_scores_csv")) != expect++)
            throw BadMagic("load_scores_csv: non-contiguous index column in " + path);
        out.scores.push_back(parse_double(cells[1], "load_scores_csv"));
        out.detector_id = std::string(cells[2]);
    }
    return out;
}

void save_flags_csv(const std::string& path, const FlagSet& fs, std::uint64_t dataset_hash) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("save_flags_csv: cannot write " + path);
    f << "index,source\n";
    for (std::size_t i : fs.indices) f << i << ',' << fs.source << "\n";
    if (!f) throw IoError("save_flags_csv: write failed for " + path);

    nlohmann::json meta;
    meta["n_points"] = fs.n_points;
    meta["k"] = fs.k;
    meta["source"] = fs.source;
    if (dataset_hash) meta["dataset_hash"] = dataset_hash;
    std::ofstream mf(path + ".meta.json", std::ios::binary);
    if (!mf) throw IoError("save_flags_csv: cannot write sidecar for " + path);
    mf << meta.dump(2) << "\n";
}

FlagSet load_flags_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_flags_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || trim(line) != "index,source")
        throw BadMagic("load_flags_csv: unexpected header in " + path);
    FlagSet out;
    while (std::getline(f, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() != 2) throw DimensionMismatch("load_flags_csv: bad row in " + path);
        out.indices.push_back(static_cast<std::size_t>(parse_int(cells[0], "load_flags_csv")));
        out.source = std::string(cells[1]);
    }
    std::sort(out.indices.begin(), out.indices.end());
    if (std::adjacent_find(out.indices.begin(), out.indices.end()) != out.indices.end())
        throw ValidationError("load_flags_csv: duplicate indices in " + path);
    out.k = out.indices.size();

    std::ifstream mf(path + ".meta.json", std::ios::binary);
    if (mf) {
        nlohmann::json meta;
        try {
            mf >> meta;
        } catch (const nlohmann::json::exception&) {
            throw BadMagic("load_flags_csv: unreadable sidecar for " + path);
        }
        out.n_points = meta.value("n_points", std::size_t{0});
        out.k = meta.value("k", out.k);
        if (meta.contains("source")) out.source = meta["source"].get<std::string>();
    }
    return out;
}

} // namespace pegasus::detect
