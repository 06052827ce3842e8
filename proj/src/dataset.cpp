#include "pegasus/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "pegasus/errors.hpp"
#include "pegasus/idx.hpp"
#include "pegasus/rng.hpp"
#include "pegasus/text.hpp"

namespace pegasus::data {

std::string resolve_data_dir(const std::string& explicit_dir) {
    if (!explicit_dir.empty()) return explicit_dir;
    if (const char* env = std::getenv("PEGASUS_DATA_DIR"); env && *env) return env;
    return "data/mnist";
}

RawDataset load_mnist_split(const std::string& dir, const std::string& split) {
    std::string prefix;
    if (split == "train")
        prefix = dir + "/train";
    else if (split == "test")
        prefix = dir + "/t10k";
    else
        throw InvalidConfig("load_mnist_split: split must be 'train' or 'test', got '" + split +
                            "'");

    const IdxData images = load_idx(prefix + "-images-idx3-ubyte");
    const IdxData labels = load_idx(prefix + "-labels-idx1-ubyte");
    if (images.dims.size() != 3)
        throw BadMagic("load_mnist_split: image file is not rank-3");
    if (labels.dims.size() != 1)
        throw BadMagic("load_mnist_split: label file is not rank-1");
    if (images.count() != labels.count())
        throw DimensionMismatch("load_mnist_split: image/label counts differ");

    const std::size_t n = images.count();
    const std::size_t d = images.record_size();
    RawDataset ds;
    ds.X = Matrix(n, d);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = ds.X.row(i);
        const std::uint8_t* px = images.data.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) row[j] = px[j] / 255.0;
        ds.labels[i] = labels.data[i];
    }
    return ds;
}

std::size_t ContaminatedSample::n_anomalies() const {
    std::size_t n = 0;
    for (auto a : is_anomaly) n += a;
    return n;
}

ContaminatedSample build_contaminated_sample(const RawDataset& ds, int bulk_class,
                                             const std::vector<AnomalySpec>& specs,
                                             std::uint64_t seed, double max_anomaly_fraction) {
    std::set<int> seen{bulk_class};
    for (const auto& s : specs) {
        if (!seen.insert(s.cls).second)
            throw InvalidConfig("build_contaminated_sample: class " + std::to_string(s.cls) +
                                " appears more than once (or equals the bulk class)");
    }

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.labels[i] == bulk_class) rows.push_back(i);
    if (rows.empty())
        throw InsufficientClassMembers("build_contaminated_sample: bulk class " +
                                       std::to_string(bulk_class) + " has no members");
    const std::size_t n_bulk = rows.size();

    Rng rng(seed);
    std::size_t n_anom = 0;
    for (const auto& s : specs) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (ds.labels[i] == s.cls) members.push_back(i);
        if (members.size() < s.count)
            throw InsufficientClassMembers(
                "build_contaminated_sample: class " + std::to_string(s.cls) + " has " +
                std::to_string(members.size()) + " members, need " + std::to_string(s.count));
        for (std::size_t j : rng.sample_without_replacement(members.size(), s.count))
            rows.push_back(members[j]);
        n_anom += s.count;
    }

    const std::size_t total = rows.size();
    const double frac = static_cast<double>(n_anom) / static_cast<double>(total);
    if (frac > max_anomaly_fraction)
        throw InvalidConfig("build_contaminated_sample: anomaly fraction " + format_double(frac) +
                            " exceeds the allowed " + format_double(max_anomaly_fraction));

    const auto perm = rng.permutation(total);

    ContaminatedSample out;
    out.X = Matrix(total, ds.X.cols());
    out.labels.resize(total);
    out.is_anomaly.resize(total);
    out.bulk_class = bulk_class;
    out.anomaly_spec = specs;
    out.seed = seed;
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t src_pos = perm[i];
        const std::size_t src_row = rows[src_pos];
        std::memcpy(out.X.row(i), ds.X.row(src_row), ds.X.cols() * sizeof(double));
        out.labels[i] = ds.labels[src_row];
        out.is_anomaly[i] = src_pos >= n_bulk ? 1 : 0;
    }
    return out;
}

void save_sample_csv(const std::string& path, const ContaminatedSample& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("save_sample_csv: cannot write " + path);
    f << "index,is_anomaly,class";
    for (std::size_t j = 0; j < s.X.cols(); ++j) f << ",f" << j;
    f << "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        f << i << ',' << int(s.is_anomaly[i]) << ',' << s.labels[i];
        const double* row = s.X.row(i);
        for (std::size_t j = 0; j < s.X.cols(); ++j) f << ',' << format_double(row[j]);
        f << "\n";
    }
    if (!f) throw IoError("save_sample_csv: write failed for " + path);
}

ContaminatedSample load_sample_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_sample_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw TruncatedFile("load_sample_csv: empty file " + path);
    const auto header = split(trim(line), ',');
    if (header.size() < 4 || header[0] != "index" || header[1] != "is_anomaly" ||
        header[2] != "class")
        throw BadMagic("load_sample_csv: unexpected header in " + path);
    const std::size_t d = header.size() - 3;

    std::vector<double> feats;
    std::vector<int> labels;
    std::vector<std::uint8_t> anom;
    std::size_t expect = 0;
    while (std::getline(f, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() != d + 3)
            throw DimensionMismatch("load_sample_csv: row width mismatch in " + path);
        if (static_cast<std::size_t>(parse_int(cells[0], "load_sample_csv")) != expect)
            throw BadMagic("load_sample_csv: non-contiguous index column in " + path);
        anom.push_back(parse_int(cells[1], "load_sample_csv") ? 1 : 0);
        labels.push_back(static_cast<int>(parse_int(cells[2], "load_sample_csv")));
        for (std::size_t j = 0; j < d; ++j)
            feats.push_back(parse_double(cells[3 + j], "load_sample_csv"));
        ++expect;
    }
    ContaminatedSample out;
    out.X = Matrix::from_rows(expect, d, std::move(feats));
    out.labels = std::move(labels);
    out.is_anomaly = std::move(anom);
    return out;
}

std::uint64_t dataset_hash(const ContaminatedSample& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::uint64_t rows = s.X.rows(), cols = s.X.cols();
    mix(&rows, sizeof rows);
    mix(&cols, sizeof cols);
    mix(s.X.data(), s.X.size() * sizeof(double));
    mix(s.labels.data(), s.labels.size() * sizeof(int));
    mix(s.is_anomaly.data(), s.is_anomaly.size());
    return h;
}

} // namespace pegasus::data
