#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "pegasus/dataset.hpp"
#include "pegasus/errors.hpp"
#include "pegasus/idx.hpp"

using namespace pegasus;
using namespace pegasus::data;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("pegasus_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// A 6-image, 2×3-pixel "mnist" directory with both splits.
fs::path make_mini_mnist() {
    const auto dir = temp_dir("mini_mnist");
    IdxData imgs;
    imgs.dims = {6, 2, 3};
    imgs.data.resize(36);
    for (std::size_t i = 0; i < imgs.data.size(); ++i)
        imgs.data[i] = static_cast<std::uint8_t>((i * 7) % 256);
    IdxData labels;
    labels.dims = {6};
    labels.data = {0, 1, 1, 0, 2, 1};
    save_idx((dir / "train-images-idx3-ubyte").string(), imgs);
    save_idx((dir / "train-labels-idx1-ubyte").string(), labels);

    IdxData timgs = imgs;
    timgs.dims[0] = 2;
    timgs.data.resize(12);
    IdxData tlabels;
    tlabels.dims = {2};
    tlabels.data = {3, 4};
    save_idx((dir / "t10k-images-idx3-ubyte").string(), timgs);
    save_idx((dir / "t10k-labels-idx1-ubyte").string(), tlabels);
    return dir;
}

// Label-balanced toy dataset for sampling tests: 1-D features equal to the
// global row index, classes 0/1/2 with 60/25/15 members.
RawDataset toy_dataset() {
    RawDataset ds;
    const std::size_t n = 100;
    ds.X = Matrix(n, 1);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ds.X(i, 0) = static_cast<double>(i);
        ds.labels[i] = i < 60 ? 0 : (i < 85 ? 1 : 2);
    }
    return ds;
}

// Minimal independent IDX reader used only for the real-data anchor test, so
// the assertion does not depend on load_idx being right.
std::vector<std::uint8_t> naive_idx_payload(const std::string& path, std::size_t skip_dims) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(bool(f));
    std::vector<std::uint8_t> head(4 + 4 * skip_dims);
    f.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    std::vector<std::uint8_t> payload((std::istreambuf_iterator<char>(f)),
                                      std::istreambuf_iterator<char>());
    return payload;
}

bool real_mnist_present(std::string& dir_out) {
    const std::string dir = resolve_data_dir("");
    for (const char* name : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                             "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"})
        if (!fs::exists(fs::path(dir) / name)) return false;
    dir_out = dir;
    return true;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("idx save/load round-trips bit-exactly") {
    const auto dir = temp_dir("idx_rt");
    IdxData in;
    in.dims = {3, 4, 5};
    in.data.resize(60);
    for (std::size_t i = 0; i < 60; ++i) in.data[i] = static_cast<std::uint8_t>(255 - i);

    const auto path = (dir / "sample.idx").string();
    save_idx(path, in);
    const IdxData out = load_idx(path);
    CHECK(out.dims == in.dims);
    CHECK(out.data == in.data);
    CHECK(out.count() == 3);
    CHECK(out.record_size() == 20);
}

TEST_CASE("idx loader rejects malformed files") {
    const auto dir = temp_dir("idx_bad");

    write_bytes(dir / "badmagic", {1, 2, 3, 4, 0, 0, 0, 1, 42});
    CHECK_THROWS_AS(load_idx((dir / "badmagic").string()), BadMagic);

    // dtype 0x0D (float) is unsupported
    write_bytes(dir / "baddtype", {0, 0, 0x0D, 1, 0, 0, 0, 1, 42});
    CHECK_THROWS_AS(load_idx((dir / "baddtype").string()), BadMagic);

    // header says 10 records, payload has 2
    write_bytes(dir / "short", {0, 0, 8, 1, 0, 0, 0, 10, 7, 7});
    CHECK_THROWS_AS(load_idx((dir / "short").string()), TruncatedFile);

    // valid 1-record file with trailing garbage
    write_bytes(dir / "trailing", {0, 0, 8, 1, 0, 0, 0, 1, 42, 99});
    CHECK_THROWS_AS(load_idx((dir / "trailing").string()), IoError);

    write_bytes(dir / "cuthead", {0, 0, 8, 2, 0, 0});
    CHECK_THROWS_AS(load_idx((dir / "cuthead").string()), TruncatedFile);

    CHECK_THROWS_AS(load_idx((dir / "missing").string()), IoError);
}

TEST_CASE("save_idx validates shape") {
    const auto dir = temp_dir("idx_save");
    IdxData bad;
    bad.dims = {2, 2};
    bad.data = {1, 2, 3};  // needs 4
    CHECK_THROWS_AS(save_idx((dir / "x").string(), bad), ShapeMismatch);
    IdxData nodims;
    nodims.data = {1};
    CHECK_THROWS_AS(save_idx((dir / "y").string(), nodims), InvalidParams);
}

TEST_CASE("load_mnist_split scales pixels and picks the split prefix") {
    const auto dir = make_mini_mnist();

    const RawDataset train = load_mnist_split(dir.string(), "train");
    REQUIRE(train.size() == 6);
    REQUIRE(train.X.cols() == 6);
    CHECK(train.labels == std::vector<int>{0, 1, 1, 0, 2, 1});
    CHECK(train.X(0, 0) == 0.0);
    CHECK(train.X(0, 1) == doctest::Approx(7.0 / 255.0).epsilon(1e-15));
    CHECK(train.X(1, 0) == doctest::Approx(42.0 / 255.0).epsilon(1e-15));

    const RawDataset test = load_mnist_split(dir.string(), "test");
    REQUIRE(test.size() == 2);
    CHECK(test.labels == std::vector<int>{3, 4});

    CHECK_THROWS_AS(load_mnist_split(dir.string(), "validation"), InvalidConfig);
}

TEST_CASE("load_mnist_split rejects count mismatches") {
    const auto dir = temp_dir("mismatch");
    IdxData imgs;
    imgs.dims = {3, 2, 2};
    imgs.data.resize(12);
    IdxData labels;
    labels.dims = {2};
    labels.data = {0, 1};
    save_idx((dir / "train-images-idx3-ubyte").string(), imgs);
    save_idx((dir / "train-labels-idx1-ubyte").string(), labels);
    CHECK_THROWS_AS(load_mnist_split(dir.string(), "train"), DimensionMismatch);
}

TEST_CASE("build_contaminated_sample draws the requested mixture") {
    const RawDataset ds = toy_dataset();
    const std::vector<AnomalySpec> specs{{1, 4}, {2, 2}};
    const ContaminatedSample s = build_contaminated_sample(ds, 0, specs, 99);

    REQUIRE(s.size() == 66);
    CHECK(s.n_anomalies() == 6);
    CHECK(s.bulk_class == 0);
    CHECK(s.seed == 99);

    std::size_t n0 = 0, n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.labels[i] == 0) ++n0;
        if (s.labels[i] == 1) ++n1;
        if (s.labels[i] == 2) ++n2;
        // is_anomaly must mark exactly the non-bulk rows
        CHECK(int(s.is_anomaly[i]) == (s.labels[i] != 0 ? 1 : 0));
        // features came through untouched (feature == original row index)
        const auto src = static_cast<std::size_t>(s.X(i, 0));
        CHECK(ds.labels[src] == s.labels[i]);
    }
    CHECK(n0 == 60);
    CHECK(n1 == 4);
    CHECK(n2 == 2);

    // anomaly rows are distinct source rows
    std::set<double> anom_rows;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.is_anomaly[i]) anom_rows.insert(s.X(i, 0));
    CHECK(anom_rows.size() == 6);
}

TEST_CASE("build_contaminated_sample is seed-deterministic") {
    const RawDataset ds = toy_dataset();
    const std::vector<AnomalySpec> specs{{1, 4}, {2, 2}};
    const ContaminatedSample a = build_contaminated_sample(ds, 0, specs, 7);
    const ContaminatedSample b = build_contaminated_sample(ds, 0, specs, 7);
    const ContaminatedSample c = build_contaminated_sample(ds, 0, specs, 8);
    CHECK(a.X == b.X);
    CHECK(a.labels == b.labels);
    CHECK(a.is_anomaly == b.is_anomaly);
    CHECK(dataset_hash(a) == dataset_hash(b));
    CHECK(dataset_hash(a) != dataset_hash(c));
}

TEST_CASE("build_contaminated_sample rejects bad requests") {
    const RawDataset ds = toy_dataset();
    CHECK_THROWS_AS(build_contaminated_sample(ds, 0, {{1, 2}, {1, 3}}, 1), InvalidConfig);
    CHECK_THROWS_AS(build_contaminated_sample(ds, 0, {{0, 2}}, 1), InvalidConfig);
    CHECK_THROWS_AS(build_contaminated_sample(ds, 0, {{2, 16}}, 1), InsufficientClassMembers);
    CHECK_THROWS_AS(build_contaminated_sample(ds, 7, {{1, 2}}, 1), InsufficientClassMembers);
    // 25 anomalies over 85 rows ≈ 0.29 > 0.10
    CHECK_THROWS_AS(build_contaminated_sample(ds, 0, {{1, 25}}, 1), InvalidConfig);
    CHECK_NOTHROW(build_contaminated_sample(ds, 0, {{1, 25}}, 1, 0.5));
}

TEST_CASE("sample csv round-trips values exactly") {
    const RawDataset ds = toy_dataset();
    ContaminatedSample s = build_contaminated_sample(ds, 0, {{1, 4}}, 3);
    // exercise shortest-round-trip float formatting on awkward values
    s.X(0, 0) = 0.1;
    s.X(1, 0) = 1.0 / 3.0;
    const auto dir = temp_dir("sample_csv");
    const auto path = (dir / "s.csv").string();
    save_sample_csv(path, s);
    const ContaminatedSample r = load_sample_csv(path);
    CHECK(r.X == s.X);
    CHECK(r.labels == s.labels);
    CHECK(r.is_anomaly == s.is_anomaly);
}

TEST_CASE("sample csv loader rejects structural damage") {
    const auto dir = temp_dir("sample_bad");

    std::ofstream(dir / "h.csv") << "idx,is_anomaly,class,f0\n";
    CHECK_THROWS_AS(load_sample_csv((dir / "h.csv").string()), BadMagic);

    std::ofstream(dir / "gap.csv") << "index,is_anomaly,class,f0\n0,0,5,0.5\n2,0,5,0.5\n";
    CHECK_THROWS_AS(load_sample_csv((dir / "gap.csv").string()), BadMagic);

    std::ofstream(dir / "wide.csv") << "index,is_anomaly,class,f0\n0,0,5,0.5,0.7\n";
    CHECK_THROWS_AS(load_sample_csv((dir / "wide.csv").string()), DimensionMismatch);

    std::ofstream(dir / "empty.csv") << "";
    CHECK_THROWS_AS(load_sample_csv((dir / "empty.csv").string()), TruncatedFile);

    CHECK_THROWS_AS(load_sample_csv((dir / "nothere.csv").string()), IoError);
}

TEST_CASE("dataset_hash reacts to any field") {
    const RawDataset ds = toy_dataset();
    const ContaminatedSample base = build_contaminated_sample(ds, 0, {{1, 4}}, 3);

    ContaminatedSample m = base;
    m.X(5, 0) += 1e-9;
    CHECK(dataset_hash(m) != dataset_hash(base));

    m = base;
    m.labels[5] ^= 1;
    CHECK(dataset_hash(m) != dataset_hash(base));

    m = base;
    m.is_anomaly[5] ^= 1;
    CHECK(dataset_hash(m) != dataset_hash(base));
}

TEST_CASE("resolve_data_dir prefers the explicit argument") {
    CHECK(resolve_data_dir("/x/y") == "/x/y");
    // the env/default fallbacks are environment-dependent; just require
    // something non-empty
    CHECK(!resolve_data_dir("").empty());
}

TEST_CASE("real mnist anchors" * doctest::description("skipped when the corpus is absent")) {
    std::string dir;
    if (!real_mnist_present(dir)) {
        MESSAGE("mnist not found under ", resolve_data_dir(""), " — skipping");
        return;
    }

    // independent read of the raw files
    const auto raw_labels = naive_idx_payload(dir + "/train-labels-idx1-ubyte", 1);
    REQUIRE(raw_labels.size() == 60000);
    const std::vector<std::uint8_t> expect_first{5, 0, 4, 1, 9, 2, 1, 3, 1, 4};
    CHECK(std::vector<std::uint8_t>(raw_labels.begin(), raw_labels.begin() + 10) == expect_first);

    const auto raw_images = naive_idx_payload(dir + "/train-images-idx3-ubyte", 3);
    REQUIRE(raw_images.size() == 60000u * 784u);
    CHECK(raw_images[208] == 253);
    std::size_t nonzero = 0, sum = 0;
    for (std::size_t i = 0; i < 784; ++i) {
        nonzero += raw_images[i] != 0;
        sum += raw_images[i];
    }
    CHECK(nonzero == 166);
    CHECK(sum == 27525);

    // the loader agrees with the raw bytes
    const RawDataset train = load_mnist_split(dir, "train");
    REQUIRE(train.size() == 60000);
    REQUIRE(train.X.cols() == 784);
    for (int i = 0; i < 10; ++i) CHECK(train.labels[i] == int(expect_first[i]));
    CHECK(train.X(0, 208) == doctest::Approx(253.0 / 255.0).epsilon(1e-15));

    std::size_t ones = 0, sevens = 0, eights = 0;
    for (int l : train.labels) {
        ones += l == 1;
        sevens += l == 7;
        eights += l == 8;
    }
    CHECK(ones == 6742);
    CHECK(sevens == 6265);
    CHECK(eights == 5851);

    const RawDataset test = load_mnist_split(dir, "test");
    REQUIRE(test.size() == 10000);
    const std::vector<int> expect_test{7, 2, 1, 0, 4, 1, 4, 9, 5, 9};
    for (int i = 0; i < 10; ++i) CHECK(test.labels[i] == expect_test[i]);
    std::size_t t1 = 0, t7 = 0, t8 = 0;
    for (int l : test.labels) {
        t1 += l == 1;
        t7 += l == 7;
        t8 += l == 8;
    }
    CHECK(t1 == 1135);
    CHECK(t7 == 1028);
    CHECK(t8 == 974);
}

}  // TEST_SUITE
