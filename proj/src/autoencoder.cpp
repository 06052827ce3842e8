#include "pegasus/autoencoder.hpp"

#include <cmath>
#include <cstring>

#include "pegasus/errors.hpp"
#include "pegasus/kernels.hpp"
#include "pegasus/rng.hpp"

namespace pegasus::manifold {

namespace {

using i64 = std::int64_t;

// act codes per layer: 0 = tanh, 1 = identity, 2 = clamp01
constexpr int kAct[4] = {0, 1, 0, 2};

void apply_activation(Matrix& A, int act) {
    const i64 n = A.size();
    double* p = A.data();
    switch (act) {
        case 0:
#pragma omp parallel for schedule(static)
            for (i64 i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
            break;
        case 1:
            break;
        case 2:
#pragma omp parallel for schedule(static)
            for (i64 i = 0; i < n; ++i) p[i] = p[i] < 0.0 ? 0.0 : (p[i] > 1.0 ? 1.0 : p[i]);
            break;
    }
}

// Forward pass keeping pre-activations (needed for the clamp mask) and
// activations per layer.
struct ForwardState {
    std::vector<Matrix> pre;  // 4: X·W+b per layer
    std::vector<Matrix> act;  // 4: activated outputs
};

ForwardState forward(const AeModel& model, const Matrix& X) {
    ForwardState st;
    const Matrix* in = &X;
    for (int l = 0; l < 4; ++l) {
        Matrix A = kernels::matmul(*in, model.W[l]);
        kernels::add_row_inplace(A, model.b[l]);
        st.pre.push_back(A);
        apply_activation(A, kAct[l]);
        st.act.push_back(std::move(A));
        in = &st.act.back();
    }
    return st;
}

// d(activation)/d(pre) applied in place to the upstream gradient.
void backprop_activation(Matrix& G, const Matrix& pre, const Matrix& act, int code) {
    const i64 n = G.size();
    double* g = G.data();
    const double* a = act.data();
    const double* z = pre.data();
    switch (code) {
        case 0:
#pragma omp parallel for schedule(static)
            for (i64 i = 0; i < n; ++i) g[i] *= 1.0 - a[i] * a[i];
            break;
        case 1:
            break;
        case 2:
#pragma omp parallel for schedule(static)
            for (i64 i = 0; i < n; ++i)
                if (z[i] <= 0.0 || z[i] >= 1.0) g[i] = 0.0;
            break;
    }
}

void check_model_input(const AeModel& model, const Matrix& X, const char* what) {
    if (X.cols() != model.input_dim()) throw ShapeMismatch(what);
}

} // namespace

AeModel ae_init(std::size_t input_dim, const AeTrainConfig& config) {
    if (config.hidden < 1 || config.latent < 1)
        throw InvalidConfig("ae_init: layer widths must be positive");
    if (config.latent >= input_dim)
        throw InvalidConfig("ae_init: latent dim must be smaller than the input dim");

    AeModel m;
    m.config = config;
    m.layer_dims = {input_dim, config.hidden, config.latent, config.hidden, input_dim};
    Rng rng(config.seed);
    for (int l = 0; l < 4; ++l) {
        const std::size_t fan_in = m.layer_dims[l];
        const std::size_t fan_out = m.layer_dims[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix W(fan_in, fan_out);
        for (std::size_t i = 0; i < W.size(); ++i) W.data()[i] = rng.uniform(-limit, limit);
        m.W.push_back(std::move(W));
        m.b.emplace_back(fan_out, 0.0);
    }
    return m;
}

double ae_loss(const AeModel& model, const Matrix& batch) {
    check_model_input(model, batch, "ae_loss: input width does not match the model");
    const ForwardState st = forward(model, batch);
    const Vector per_row = kernels::row_mse(batch, st.act.back());
    double acc = 0.0;
    for (double v : per_row) acc += v;
    return acc / static_cast<double>(batch.rows());
}

AeGradients ae_gradients(const AeModel& model, const Matrix& batch) {
    check_model_input(model, batch, "ae_gradients: input width does not match the model");
    const std::size_t B = batch.rows(), D = batch.cols();
    const ForwardState st = forward(model, batch);

    AeGradients out;
    out.dW.resize(4);
    out.db.resize(4);

    const Matrix& Y = st.act[3];
    const Vector per_row = kernels::row_mse(batch, Y);
    double acc = 0.0;
    for (double v : per_row) acc += v;
    out.loss = acc / static_cast<double>(B);

    // dL/dY for L = mean over (B·D) of (Y − X)².
    Matrix G(B, D);
    {
        const double scale = 2.0 / static_cast<double>(B * D);
        const i64 n = G.size();
        double* g = G.data();
        const double* y = Y.data();
        const double* x = batch.data();
#pragma omp parallel for schedule(static)
        for (i64 i = 0; i < n; ++i) g[i] = scale * (y[i] - x[i]);
    }

    for (int l = 3; l >= 0; --l) {
        backprop_activation(G, st.pre[l], st.act[l], kAct[l]);
        const Matrix& input = l == 0 ? batch : st.act[l - 1];
        out.dW[l] = kernels::matmul_at(input, G);
        out.db[l] = kernels::col_sum(G);
        if (l > 0) G = kernels::matmul_bt(G, model.W[l]);
    }
    return out;
}

AeModel ae_fit(const Matrix& X, const AeTrainConfig& config) {
    if (config.epochs < 1) throw InvalidConfig("ae_fit: epochs must be ≥ 1");
    if (config.batch_size < 1) throw InvalidConfig("ae_fit: batch_size must be ≥ 1");
    if (!(config.learning_rate > 0.0)) throw InvalidConfig("ae_fit: learning_rate must be > 0");
    if (!(config.momentum >= 0.0 && config.momentum < 1.0))
        throw InvalidConfig("ae_fit: momentum must lie in [0, 1)");
    if (X.rows() == 0) throw TooFewPoints("ae_fit: empty training set");

    AeModel model = ae_init(X.cols(), config);
    const std::size_t n = X.rows(), D = X.cols();

    std::vector<Matrix> vW;
    std::vector<Vector> vb;
    for (int l = 0; l < 4; ++l) {
        vW.emplace_back(model.W[l].rows(), model.W[l].cols());
        vb.emplace_back(model.b[l].size(), 0.0);
    }

    Rng shuffle_rng = Rng(config.seed).derive(1);
    Matrix batch;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto perm = shuffle_rng.permutation(n);
        double epoch_sse = 0.0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            const std::size_t B = stop - start;
            batch = Matrix(B, D);
            for (std::size_t r = 0; r < B; ++r)
                std::memcpy(batch.row(r), X.row(perm[start + r]), D * sizeof(double));

            AeGradients g = ae_gradients(model, batch);
            epoch_sse += g.loss * static_cast<double>(B);

            for (int l = 0; l < 4; ++l) {
                {
                    const i64 sz = model.W[l].size();
                    double* w = model.W[l].data();
                    double* v = vW[l].data();
                    const double* dw = g.dW[l].data();
#pragma omp parallel for schedule(static)
                    for (i64 i = 0; i < sz; ++i) {
                        v[i] = config.momentum * v[i] - config.learning_rate * dw[i];
                        w[i] += v[i];
                    }
                }
                for (std::size_t i = 0; i < model.b[l].size(); ++i) {
                    vb[l][i] = config.momentum * vb[l][i] - config.learning_rate * g.db[l][i];
                    model.b[l][i] += vb[l][i];
                }
            }
        }
        const double epoch_loss = epoch_sse / static_cast<double>(n);
        if (!std::isfinite(epoch_loss))
            throw NonFiniteLoss("ae_fit: training diverged at epoch " + std::to_string(epoch));
        model.final_train_loss = epoch_loss;
    }
    return model;
}

Matrix ae_encode(const AeModel& model, const Matrix& X) {
    check_model_input(model, X, "ae_encode: input width does not match the model");
    Matrix H = kernels::matmul(X, model.W[0]);
    kernels::add_row_inplace(H, model.b[0]);
    apply_activation(H, kAct[0]);
    Matrix Z = kernels::matmul(H, model.W[1]);
    kernels::add_row_inplace(Z, model.b[1]);
    apply_activation(Z, kAct[1]);
    return Z;
}

Matrix ae_decode(const AeModel& model, const Matrix& Z) {
    if (Z.cols() != model.latent_dim())
        throw ShapeMismatch("ae_decode: latent width does not match the model");
    Matrix H = kernels::matmul(Z, model.W[2]);
    kernels::add_row_inplace(H, model.b[2]);
    apply_activation(H, kAct[2]);
    Matrix Y = kernels::matmul(H, model.W[3]);
    kernels::add_row_inplace(Y, model.b[3]);
    apply_activation(Y, kAct[3]);
    return Y;
}

Vector ae_reconstruction_error(const AeModel& model, const Matrix& X) {
    const Matrix Y = ae_decode(model, ae_encode(model, X));
    return kernels::row_mse(X, Y);
}

} // namespace pegasus::manifold
