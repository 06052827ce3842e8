#pragma once

#include <cstdint>
#include <vector>

#include "pegasus/matrix.hpp"

namespace pegasus::manifold {

struct AeTrainConfig {
    std::size_t hidden = 256;
    std::size_t latent = 30;
    std::size_t epochs = 50;
    std::size_t batch_size = 128;
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::uint64_t seed = 0;
};

// D → hidden → M → hidden → D. tanh on the two hidden layers, linear latent,
// output clamped to [0,1] (features are pixel-scaled). Weights W[l] are
// (in × out); biases b[l] have the layer's output width.
struct AeModel {
    std::vector<std::size_t> layer_dims;  // {D, hidden, M, hidden, D}
    std::vector<Matrix> W;                // 4 layers
    std::vector<Vector> b;
    AeTrainConfig config;
    double final_train_loss = 0.0;

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t latent_dim() const { return layer_dims[2]; }
};

// Uninitialized-but-shaped model with seeded uniform ±√(6/(fan_in+fan_out))
// weights and zero biases; exposed so tests can build tiny networks.
AeModel ae_init(std::size_t input_dim, const AeTrainConfig& config);

// Mini-batch SGD with momentum on mean-squared reconstruction loss. Bitwise
// deterministic for a fixed seed at any thread count (order-preserving
// kernels). Throws NonFiniteLoss on divergence, InvalidConfig on bad config.
AeModel ae_fit(const Matrix& X, const AeTrainConfig& config);

Matrix ae_encode(const AeModel& model, const Matrix& X);
Matrix ae_decode(const AeModel& model, const Matrix& Z);
Vector ae_reconstruction_error(const AeModel& model, const Matrix& X);

// Batch loss and analytic gradients (averaged over batch rows and D, the
// training objective); used by the trainer and the finite-difference tests.
struct AeGradients {
    std::vector<Matrix> dW;
    std::vector<Vector> db;
    double loss = 0.0;
};
double ae_loss(const AeModel& model, const Matrix& batch);
AeGradients ae_gradients(const AeModel& model, const Matrix& batch);

} // namespace pegasus::manifold
