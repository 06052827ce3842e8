#include <bit>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>

#include <json.hpp>

#include "pegasus/errors.hpp"
#include "pegasus/kernels.hpp"
#include "pegasus/manifold.hpp"
#include "pegasus/version.hpp"

// Container layout (all integers little-endian):
//   8 bytes  magic "PEGMODEL"
//   u32      format version
//   u8       kind: 0 = pca, 1 = ae
//   u64      seed (0 for pca)
//   u32      tensor count
//   tensors: u16 name length, name bytes, u8 ndim, u64 dims[ndim], f64 data

namespace pegasus::manifold {

namespace {

constexpr char kMagic[8] = {'P', 'E', 'G', 'M', 'O', 'D', 'E', 'L'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

static_assert(std::endian::native == std::endian::little,
              "model container writer assumes a little-endian host");

template <class T>
void write_pod(std::FILE* f, const T& v) {
    std::fwrite(&v, sizeof(T), 1, f);
}

template <class T>
T read_pod(std::FILE* f, const char* what) {
    T v;
    if (std::fread(&v, sizeof(T), 1, f) != 1)
        throw TruncatedFile(std::string("model: unexpected end of file reading ") + what);
    return v;
}

struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
};

void write_tensor(std::FILE* f, const std::string& name, const std::vector<std::uint64_t>& dims,
                  const double* data) {
    write_pod<std::uint16_t>(f, static_cast<std::uint16_t>(name.size()));
    std::fwrite(name.data(), 1, name.size(), f);
    write_pod<std::uint8_t>(f, static_cast<std::uint8_t>(dims.size()));
    std::size_t total = 1;
    for (auto d : dims) {
        write_pod<std::uint64_t>(f, d);
        total *= d;
    }
    std::fwrite(data, sizeof(double), total, f);
}

std::pair<std::string, Tensor> read_tensor(std::FILE* f) {
    const auto name_len = read_pod<std::uint16_t>(f, "tensor name length");
    std::string name(name_len, '\0');
    if (name_len && std::fread(name.data(), 1, name_len, f) != name_len)
        throw TruncatedFile("model: unexpected end of file reading tensor name");
    const auto ndim = read_pod<std::uint8_t>(f, "tensor rank");
    if (ndim == 0 || ndim > 4) throw BadMagic("model: tensor rank out of range");
    Tensor t;
    std::size_t total = 1;
    for (unsigned i = 0; i < ndim; ++i) {
        t.dims.push_back(read_pod<std::uint64_t>(f, "tensor dims"));
        total *= t.dims.back();
    }
    if (total > (1ull << 32)) throw BadMagic("model: tensor implausibly large");
    t.data.resize(total);
    if (total && std::fread(t.data.data(), sizeof(double), total, f) != total)
        throw TruncatedFile("model: unexpected end of file reading tensor data");
    return {std::move(name), std::move(t)};
}

const Tensor& need(const std::map<std::string, Tensor>& ts, const std::string& name) {
    auto it = ts.find(name);
    if (it == ts.end()) throw BadMagic("model: missing tensor '" + name + "'");
    return it->second;
}

Matrix as_matrix(const Tensor& t, const char* what) {
    if (t.dims.size() != 2) throw DimensionMismatch(std::string("model: expected matrix for ") + what);
    return Matrix::from_rows(t.dims[0], t.dims[1], t.data);
}

Vector as_vector(const Tensor& t, const char* what) {
    if (t.dims.size() != 1) throw DimensionMismatch(std::string("model: expected vector for ") + what);
    return t.data;
}

void write_sidecar(const std::string& path, const ManifoldModel& m) {
    nlohmann::json j;
    j["tool_version"] = kVersion;
    j["format_version"] = kModelFormatVersion;
    j["method"] = m.method();
    j["input_dim"] = m.input_dim();
    j["latent_dim"] = m.latent_dim();
    j["fit_metric"] = m.fit_metric;
    if (!m.is_pca()) {
        const auto& ae = std::get<AeModel>(m.model);
        j["train_config"] = {{"hidden", ae.config.hidden},       {"latent", ae.config.latent},
                             {"epochs", ae.config.epochs},       {"batch_size", ae.config.batch_size},
                             {"learning_rate", ae.config.learning_rate},
                             {"momentum", ae.config.momentum},   {"seed", ae.config.seed}};
        j["final_train_loss"] = ae.final_train_loss;
    }
    FilePtr f(std::fopen((path + ".json").c_str(), "wb"));
    if (!f) throw IoError("model: cannot write sidecar for " + path);
    const std::string text = j.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f.get());
}

} // namespace

void save_model(const std::string& path, const ManifoldModel& m) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("model: cannot write " + path);
    std::fwrite(kMagic, 1, sizeof(kMagic), f.get());
    write_pod<std::uint32_t>(f.get(), kModelFormatVersion);
    write_pod<std::uint8_t>(f.get(), m.is_pca() ? 0 : 1);

    if (m.is_pca()) {
        const auto& p = std::get<PcaModel>(m.model);
        write_pod<std::uint64_t>(f.get(), 0);
        write_pod<std::uint32_t>(f.get(), 5);
        write_tensor(f.get(), "mean", {p.mean.size()}, p.mean.data());
        write_tensor(f.get(), "components", {p.components.rows(), p.components.cols()},
                     p.components.data());
        write_tensor(f.get(), "singular_values", {p.singular_values.size()},
                     p.singular_values.data());
        write_tensor(f.get(), "explained_variance_ratio", {p.explained_variance_ratio.size()},
                     p.explained_variance_ratio.data());
        write_tensor(f.get(), "fit_metric", {1}, &m.fit_metric);
    } else {
        const auto& ae = std::get<AeModel>(m.model);
        write_pod<std::uint64_t>(f.get(), ae.config.seed);
        write_pod<std::uint32_t>(f.get(), 4 + 4 + 3);
        for (int l = 0; l < 4; ++l) {
            const std::string suffix = std::to_string(l);
            write_tensor(f.get(), "W" + suffix, {ae.W[l].rows(), ae.W[l].cols()}, ae.W[l].data());
            write_tensor(f.get(), "b" + suffix, {ae.b[l].size()}, ae.b[l].data());
        }
        const double train_cfg[6] = {
            static_cast<double>(ae.config.hidden),     static_cast<double>(ae.config.latent),
            static_cast<double>(ae.config.epochs),     static_cast<double>(ae.config.batch_size),
            ae.config.learning_rate,                   ae.config.momentum};
        write_tensor(f.get(), "train_config", {6}, train_cfg);
        write_tensor(f.get(), "final_train_loss", {1}, &ae.final_train_loss);
        write_tensor(f.get(), "fit_metric", {1}, &m.fit_metric);
    }
    if (std::ferror(f.get())) throw IoError("model: write failed for " + path);
    f.reset();
    write_sidecar(path, m);
}

ManifoldModel load_model(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("model: cannot open " + path);
    char magic[8];
    if (std::fread(magic, 1, 8, f.get()) != 8 || std::memcmp(magic, kMagic, 8) != 0)
        throw BadMagic("model: bad magic in " + path);
    const auto version = read_pod<std::uint32_t>(f.get(), "version");
    if (version != kModelFormatVersion)
        throw BadMagic("model: unsupported format version in " + path);
    const auto kind = read_pod<std::uint8_t>(f.get(), "kind");
    if (kind > 1) throw BadMagic("model: unknown model kind in " + path);
    const auto seed = read_pod<std::uint64_t>(f.get(), "seed");
    const auto n_tensors = read_pod<std::uint32_t>(f.get(), "tensor count");
    if (n_tensors > 64) throw BadMagic("model: implausible tensor count in " + path);

    std::map<std::string, Tensor> ts;
    for (std::uint32_t i = 0; i < n_tensors; ++i) ts.insert(read_tensor(f.get()));

    ManifoldModel out;
    if (kind == 0) {
        PcaModel p;
        p.mean = as_vector(need(ts, "mean"), "mean");
        p.components = as_matrix(need(ts, "components"), "components");
        p.singular_values = as_vector(need(ts, "singular_values"), "singular_values");
        p.explained_variance_ratio =
            as_vector(need(ts, "explained_variance_ratio"), "explained_variance_ratio");
        if (p.mean.size() != p.components.cols() ||
            p.singular_values.size() != p.components.rows() ||
            p.explained_variance_ratio.size() != p.components.rows())
            throw DimensionMismatch("model: inconsistent PCA tensor shapes in " + path);
        out.model = std::move(p);
    } else {
        AeModel ae;
        const Vector cfg = as_vector(need(ts, "train_config"), "train_config");
        if (cfg.size() != 6) throw DimensionMismatch("model: bad train_config in " + path);
        ae.config.hidden = static_cast<std::size_t>(cfg[0]);
        ae.config.latent = static_cast<std::size_t>(cfg[1]);
        ae.config.epochs = static_cast<std::size_t>(cfg[2]);
        ae.config.batch_size = static_cast<std::size_t>(cfg[3]);
        ae.config.learning_rate = cfg[4];
        ae.config.momentum = cfg[5];
        ae.config.seed = seed;
        ae.final_train_loss = as_vector(need(ts, "final_train_loss"), "final_train_loss").at(0);
        for (int l = 0; l < 4; ++l) {
            const std::string suffix = std::to_string(l);
            ae.W.push_back(as_matrix(need(ts, "W" + suffix), "weights"));
            ae.b.push_back(as_vector(need(ts, "b" + suffix), "biases"));
        }
        ae.layer_dims = {ae.W[0].rows(), ae.W[0].cols(), ae.W[1].cols(), ae.W[2].cols(),
                         ae.W[3].cols()};
        for (int l = 0; l < 4; ++l) {
            if (ae.b[l].size() != ae.W[l].cols() ||
                (l > 0 && ae.W[l].rows() != ae.W[l - 1].cols()))
                throw DimensionMismatch("model: inconsistent AE tensor shapes in " + path);
        }
        if (ae.layer_dims[4] != ae.layer_dims[0] || ae.layer_dims[3] != ae.layer_dims[1])
            throw DimensionMismatch("model: AE layer widths are not mirrored in " + path);
        out.model = std::move(ae);
    }
    out.fit_metric = as_vector(need(ts, "fit_metric"), "fit_metric").at(0);
    return out;
}

Matrix encode(const ManifoldModel& m, const Matrix& X) {
    return m.is_pca() ? pca_encode(std::get<PcaModel>(m.model), X)
                      : ae_encode(std::get<AeModel>(m.model), X);
}

Matrix decode(const ManifoldModel& m, const Matrix& Z) {
    return m.is_pca() ? pca_decode(std::get<PcaModel>(m.model), Z)
                      : ae_decode(std::get<AeModel>(m.model), Z);
}

Vector reconstruction_error(const ManifoldModel& m, const Matrix& X) {
    return m.is_pca() ? pca_reconstruction_error(std::get<PcaModel>(m.model), X)
                      : ae_reconstruction_error(std::get<AeModel>(m.model), X);
}

namespace {

double mean_of(const Vector& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

} // namespace

ManifoldModel fit_pca_manifold(const Matrix& X, const PcaTarget& target) {
    ManifoldModel m;
    m.model = pca_fit(X, target);
    m.fit_metric = mean_of(reconstruction_error(m, X));
    return m;
}

ManifoldModel fit_ae_manifold(const Matrix& X, const AeTrainConfig& config) {
    ManifoldModel m;
    m.model = ae_fit(X, config);
    m.fit_metric = mean_of(reconstruction_error(m, X));
    return m;
}

} // namespace pegasus::manifold
