#include "pegasus/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "pegasus/errors.hpp"
#include "pegasus/rng.hpp"

namespace pegasus::data {

double PegasusConfig::slope() const {
    const double rho = height_weight_correlation;
    return rho / std::sqrt(1.0 - rho * rho) * (noise_scale / std_height);
}

std::array<double, 4> PegasusConfig::covariance() const {
    const double a = slope();
    const double vh = std_height * std_height;
    return {vh, a * vh, a * vh, a * a * vh + noise_scale * noise_scale};
}

double PegasusConfig::peak_density() const {
    const auto c = covariance();
    const double det = c[0] * c[3] - c[1] * c[2];
    return 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
}

double PegasusConfig::density(double height, double weight, double wings) const {
    if (wings != 0.0) return 0.0;
    const auto c = covariance();
    const double det = c[0] * c[3] - c[1] * c[2];
    const double dh = height - mean_height;
    const double dw = weight - mean_weight();
    // Mahalanobis² via the explicit 2×2 inverse.
    const double m2 = (c[3] * dh * dh - 2.0 * c[1] * dh * dw + c[0] * dw * dw) / det;
    return std::exp(-0.5 * m2) * peak_density();
}

double PegasusConfig::resolved_tau() const {
    return density_threshold_tau < 0.0 ? 0.001 * peak_density() : density_threshold_tau;
}

void PegasusConfig::validate() const {
    if (n_normal == 0) throw InvalidConfig("pegasus: n_normal must be positive");
    if (!(height_weight_correlation > 0.0 && height_weight_correlation < 1.0))
        throw InvalidConfig("pegasus: correlation must lie strictly in (0,1)");
    if (!(std_height > 0.0)) throw InvalidConfig("pegasus: std_height must be positive");
    if (!(noise_scale > 0.0)) throw InvalidConfig("pegasus: noise_scale must be positive");
    if (density_threshold_tau >= 0.0 && !(density_threshold_tau <= peak_density()))
        throw InvalidConfig("pegasus: tau above the density maximum labels everything anomalous");
}

PegasusConfig default_pegasus_config() {
    PegasusConfig cfg;
    const double a = cfg.slope();
    cfg.special_points = {
        {"Eohippus", 0.25, a * 0.25, 0.0, 0.0},
        {"Sampson", 2.20, a * 2.20, 0.0, 0.0},
        {"Pegasus_m", 1.50, a * 1.50, 1.0, 0.0},
        {"Pegasus_h", 1.50, a * 1.50, 1.0, 300.0},
    };
    return cfg;
}

ContaminatedSample generate_pegasus(const PegasusConfig& config, std::uint64_t seed) {
    config.validate();
    const double a = config.slope();
    const double tau = config.resolved_tau();
    const std::size_t n = config.n_normal;
    const std::size_t total = n + config.special_points.size();

    Rng rng(seed);
    std::vector<double> h(n), w(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = rng.normal(config.mean_height, config.std_height);
    for (std::size_t i = 0; i < n; ++i) w[i] = a * h[i] + rng.normal(0.0, config.noise_scale);

    Matrix X(total, 3);
    std::vector<int> cls(total, 0);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = h[i];
        X(i, 1) = w[i];
        X(i, 2) = 0.0;
    }
    for (std::size_t s = 0; s < config.special_points.size(); ++s) {
        const auto& p = config.special_points[s];
        X(n + s, 0) = p.height;
        X(n + s, 1) = p.weight + p.wing_weight;
        X(n + s, 2) = p.wings;
        cls[n + s] = static_cast<int>(s) + 1;
    }

    std::vector<std::uint8_t> anom(total);
    for (std::size_t i = 0; i < total; ++i)
        anom[i] = config.density(X(i, 0), X(i, 1), X(i, 2)) <= tau ? 1 : 0;

    const auto perm = rng.permutation(total);
    ContaminatedSample out;
    out.X = Matrix(total, 3);
    out.labels.resize(total);
    out.is_anomaly.resize(total);
    out.bulk_class = 0;
    out.seed = seed;
    std::size_t n_anom = 0;
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t src = perm[i];
        out.X(i, 0) = X(src, 0);
        out.X(i, 1) = X(src, 1);
        out.X(i, 2) = X(src, 2);
        out.labels[i] = cls[src];
        out.is_anomaly[i] = anom[src];
        n_anom += anom[src];
    }
    if (10 * n_anom > total)
        throw InvalidConfig("pegasus: configured tau labels more than 10% of rows anomalous");
    return out;
}

} // namespace pegasus::data
