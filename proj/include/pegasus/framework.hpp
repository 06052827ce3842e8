#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pegasus/dataset.hpp"
#include "pegasus/detectors/common.hpp"
#include "pegasus/matrix.hpp"

namespace pegasus {

// Threshold rule for splitting a sample into well- and poorly-represented
// halves by reconstruction error.
struct TauRule {
    enum class Kind { Quantile, Absolute };
    Kind kind = Kind::Quantile;
    double value = 0.95;  // quantile in (0,1), or an absolute RE threshold

    static TauRule quantile(double q);
    static TauRule absolute(double tau);
};

// Partition of a labelled sample induced by a manifold: a point is poorly
// represented iff its reconstruction error exceeds tau (strictly).
struct PartitionReport {
    std::vector<std::size_t> a_plus;   // anomalies, well represented
    std::vector<std::size_t> a_minus;  // anomalies, poorly represented
    std::vector<std::size_t> n_plus;   // normals, well represented
    std::vector<std::size_t> n_minus;  // normals, poorly represented
    double tau = 0.0;                  // resolved threshold
    std::string manifold_id;

    std::size_t n_points() const {
        return a_plus.size() + a_minus.size() + n_plus.size() + n_minus.size();
    }
    std::size_t n_anomalies() const { return a_plus.size() + a_minus.size(); }
};

PartitionReport partition_by_representation(const Vector& recon_error,
                                            const data::ContaminatedSample& sample,
                                            const TauRule& rule = TauRule{},
                                            std::string manifold_id = "");

// Which detection regime a manifold puts the sample in.  ratio_a is
// |A-|/|A+| (how dominantly the anomalies fall off the manifold), ratio_n
// the same for normals; an empty denominator with a nonempty numerator
// yields +inf, and 0 when both are empty.
struct RegimeDiagnostics {
    std::size_t latent_dim = 0;
    std::size_t input_dim = 0;
    double ratio_a = 0.0;
    double ratio_n = 0.0;
    std::string regime_label;  // "M<<D" or "M~D"
};

RegimeDiagnostics regime_diagnostics(const PartitionReport& part, std::size_t latent_dim,
                                     std::size_t input_dim, double cutoff = 0.2);

// Detection-quality estimates implied by a partition, next to the values
// measured from actual flag sets on the same sample.
struct FrameworkEstimates {
    std::size_t n_points = 0;
    std::size_t n_anomalies = 0;
    std::size_t a_plus = 0;
    std::size_t a_minus = 0;
    std::size_t n_plus = 0;
    std::size_t n_minus = 0;

    // Implied by the partition alone: an ideal off-manifold detector flags
    // exactly the points above tau.
    double est_recall_off = 0.0;
    double est_precision_off = 0.0;

    // Measured against ground truth.
    double measured_recall_on = 0.0;
    double measured_recall_off = 0.0;
    double measured_precision_off = 0.0;
    double measured_recall_union = 0.0;
    double measured_precision_union = 0.0;
};

FrameworkEstimates framework_estimates(const PartitionReport& part,
                                       const detect::FlagSet& on_flags,
                                       const detect::FlagSet& off_flags,
                                       const data::ContaminatedSample& sample);

// Concentration-of-distances demonstration: squared distances between
// uniform pairs in [0,1]^dim, and the radial mode of a standard Gaussian.
struct CodReport {
    std::size_t dim = 0;
    std::size_t n_pairs = 0;
    double mean_sq_dist = 0.0;
    double std_sq_dist = 0.0;          // sample std, n-1
    double gaussian_peak_radius = 0.0;  // center of the modal 0.25-wide radius bin
    std::uint64_t seed = 0;
};

CodReport curse_of_dim_demo(std::size_t dim, std::size_t n_pairs, std::uint64_t seed);

void to_json(nlohmann::json& j, const PartitionReport& r);
void to_json(nlohmann::json& j, const RegimeDiagnostics& r);
void to_json(nlohmann::json& j, const FrameworkEstimates& r);
void to_json(nlohmann::json& j, const CodReport& r);

}  // namespace pegasus
