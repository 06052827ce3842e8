#pragma once

#include <string>
#include <variant>

#include "pegasus/autoencoder.hpp"
#include "pegasus/matrix.hpp"
#include "pegasus/pca.hpp"

namespace pegasus::manifold {

// Tagged union over the two manifold families plus fit provenance.
struct ManifoldModel {
    std::variant<PcaModel, AeModel> model;
    double fit_metric = 0.0;  // mean training reconstruction MSE

    bool is_pca() const { return std::holds_alternative<PcaModel>(model); }
    const char* method() const { return is_pca() ? "pca" : "ae"; }
    std::size_t latent_dim() const {
        return is_pca() ? std::get<PcaModel>(model).latent_dim()
                        : std::get<AeModel>(model).latent_dim();
    }
    std::size_t input_dim() const {
        return is_pca() ? std::get<PcaModel>(model).input_dim()
                        : std::get<AeModel>(model).input_dim();
    }
};

Matrix encode(const ManifoldModel& m, const Matrix& X);
Matrix decode(const ManifoldModel& m, const Matrix& Z);
Vector reconstruction_error(const ManifoldModel& m, const Matrix& X);

// Convenience fitters that also record the training-set fit metric.
ManifoldModel fit_pca_manifold(const Matrix& X, const PcaTarget& target);
ManifoldModel fit_ae_manifold(const Matrix& X, const AeTrainConfig& config);

// Versioned binary container (magic, version, little-endian f64 tensors with
// shape headers) plus a JSON sidecar `<path>.json` with config and seeds.
void save_model(const std::string& path, const ManifoldModel& m);
ManifoldModel load_model(const std::string& path);

} // namespace pegasus::manifold
