#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pegasus/dataset.hpp"

namespace pegasus::data {

// A named point appended to the synthetic horse dataset. wing_weight is
// folded into the weight coordinate at generation time (heavy wings push the
// point out of the bulk weight range; weightless wings leave it centred).
struct SpecialPoint {
    std::string name;
    double height = 0.0;
    double weight = 0.0;
    double wings = 0.0;
    double wing_weight = 0.0;
};

// Correlated (height, weight) bivariate Gaussian with a third binary wings
// coordinate. weight = slope·height + N(0, noise_scale²); the slope is
// derived from the requested correlation: a = ρ/√(1−ρ²) · noise_scale/std_height.
struct PegasusConfig {
    std::size_t n_normal = 10000;
    double mean_height = 1.5;
    double std_height = 0.15;
    double height_weight_correlation = 0.95;
    double noise_scale = 20.0;
    // Density cutoff for the ground-truth label; < 0 means "use the default
    // 0.1% quantile of the bulk law", resolved at generation time.
    double density_threshold_tau = -1.0;
    std::vector<SpecialPoint> special_points;

    double slope() const;
    // 2×2 covariance of the (height, weight) bulk law, row-major.
    std::array<double, 4> covariance() const;
    double mean_weight() const { return slope() * mean_height; }
    double peak_density() const;
    // Generative density: bivariate normal over (height, weight) when
    // wings == 0, exactly 0 otherwise (the bulk law has no support off the
    // wings = 0 plane).
    double density(double height, double weight, double wings) const;
    double resolved_tau() const;

    void validate() const;
};

// Default setup: the four named points of the horse story. Eohippus and
// Sampson sit on the regression line at extreme heights; Pegasus_m has
// weightless wings at the bivariate mean; Pegasus_h adds 300 kg of wings.
PegasusConfig default_pegasus_config();

// Rows are a seeded shuffle of bulk + specials. class label 0 = bulk; special
// point i gets class i+1 (one row each, so specials stay identifiable).
// is_anomaly is true iff the generative density at the row is ≤ tau.
ContaminatedSample generate_pegasus(const PegasusConfig& config, std::uint64_t seed);

} // namespace pegasus::data
