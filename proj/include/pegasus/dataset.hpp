#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pegasus/matrix.hpp"

namespace pegasus::data {

// A labelled dataset with features already scaled to [0,1].
struct RawDataset {
    Matrix X;
    std::vector<int> labels;

    std::size_t size() const { return X.rows(); }
};

// Resolves the MNIST directory: explicit argument > $PEGASUS_DATA_DIR >
// ./data/mnist. Does not check existence.
std::string resolve_data_dir(const std::string& explicit_dir = "");

// Loads train-* or t10k-* IDX pairs from `dir` ("train" / "test"), scales
// pixels by 1/255, flattens images to rows. Throws DimensionMismatch when the
// image and label counts disagree.
RawDataset load_mnist_split(const std::string& dir, const std::string& split);

struct AnomalySpec {
    int cls = 0;
    std::size_t count = 0;
};

// The evaluation sample: every member of one bulk class plus small seeded
// draws from the anomaly classes, in a seeded shuffled order. is_anomaly marks
// exactly the injected rows, so (normals, anomalies) partition the sample.
struct ContaminatedSample {
    Matrix X;
    std::vector<int> labels;
    std::vector<std::uint8_t> is_anomaly;
    int bulk_class = -1;
    std::vector<AnomalySpec> anomaly_spec;
    std::uint64_t seed = 0;

    std::size_t size() const { return X.rows(); }
    std::size_t n_anomalies() const;
};

// Deterministic given (ds, bulk_class, specs, seed). Throws
// InsufficientClassMembers when a class cannot supply `count` distinct rows,
// InvalidConfig for duplicate/overlapping classes or when the anomaly
// fraction would exceed `max_anomaly_fraction`.
ContaminatedSample build_contaminated_sample(const RawDataset& ds, int bulk_class,
                                             const std::vector<AnomalySpec>& specs,
                                             std::uint64_t seed,
                                             double max_anomaly_fraction = 0.10);

// CSV with header: index,is_anomaly,class,f0..f{D-1}. Floats are written in
// shortest round-trip form; save∘load is value-exact.
void save_sample_csv(const std::string& path, const ContaminatedSample& s);
ContaminatedSample load_sample_csv(const std::string& path);

// FNV-1a over the sample's bytes; used by sidecars to detect mixed datasets.
std::uint64_t dataset_hash(const ContaminatedSample& s);

} // namespace pegasus::data
