#include "pegasus/framework.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pegasus/errors.hpp"
#include "pegasus/metrics.hpp"
#include "pegasus/rng.hpp"
#include "pegasus/stats.hpp"

namespace pegasus {

TauRule TauRule::quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw InvalidParams("tau quantile must lie in (0,1)");
    return TauRule{Kind::Quantile, q};
}

TauRule TauRule::absolute(double tau) {
    if (!std::isfinite(tau) || tau < 0.0) throw InvalidParams("absolute tau must be finite and >= 0");
    return TauRule{Kind::Absolute, tau};
}

PartitionReport partition_by_representation(const Vector& recon_error,
                                            const data::ContaminatedSample& sample,
                                            const TauRule& rule, std::string manifold_id) {
    const std::size_t n = sample.size();
    if (recon_error.size() != n) {
        throw CoverageMismatch("got " + std::to_string(recon_error.size()) +
                               " reconstruction errors for a sample of " + std::to_string(n) +
                               " points");
    }
    for (double v : recon_error) {
        if (!std::isfinite(v)) throw InvalidParams("reconstruction errors must be finite");
    }

    double tau = 0.0;
    if (rule.kind == TauRule::Kind::Quantile) {
        if (!(rule.value > 0.0 && rule.value < 1.0))
            throw InvalidParams("tau quantile must lie in (0,1)");
        std::vector<double> normal_re;
        normal_re.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (sample.is_anomaly[i] == 0) normal_re.push_back(recon_error[i]);
        }
        if (normal_re.empty())
            throw TooFewPoints("cannot place a quantile threshold without normal points");
        tau = quantile(std::move(normal_re), rule.value);
    } else {
        if (!std::isfinite(rule.value) || rule.value < 0.0)
            throw InvalidParams("absolute tau must be finite and >= 0");
        tau = rule.value;
    }

    PartitionReport rep;
    rep.tau = tau;
    rep.manifold_id = std::move(manifold_id);
    for (std::size_t i = 0; i < n; ++i) {
        const bool poor = recon_error[i] > tau;
        if (sample.is_anomaly[i] != 0) {
            (poor ? rep.a_minus : rep.a_plus).push_back(i);
        } else {
            (poor ? rep.n_minus : rep.n_plus).push_back(i);
        }
    }
    return rep;
}

namespace {

double set_ratio(std::size_t minus, std::size_t plus) {
    if (plus == 0) return minus == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(minus) / static_cast<double>(plus);
}

}  // namespace

RegimeDiagnostics regime_diagnostics(const PartitionReport& part, std::size_t latent_dim,
                                     std::size_t input_dim, double cutoff) {
    if (latent_dim == 0 || input_dim == 0) throw InvalidParams("dimensions must be positive");
    if (latent_dim > input_dim)
        throw InvalidParams("latent dimension cannot exceed input dimension");
    if (!(cutoff > 0.0 && cutoff <= 1.0)) throw InvalidParams("regime cutoff must lie in (0,1]");

    RegimeDiagnostics d;
    d.latent_dim = latent_dim;
    d.input_dim = input_dim;
    d.ratio_a = set_ratio(part.a_minus.size(), part.a_plus.size());
    d.ratio_n = set_ratio(part.n_minus.size(), part.n_plus.size());
    const double frac = static_cast<double>(latent_dim) / static_cast<double>(input_dim);
    d.regime_label = frac < cutoff ? "M<<D" : "M~D";
    return d;
}

FrameworkEstimates framework_estimates(const PartitionReport& part,
                                       const detect::FlagSet& on_flags,
                                       const detect::FlagSet& off_flags,
                                       const data::ContaminatedSample& sample) {
    if (part.n_points() != sample.size()) {
        throw CoverageMismatch("partition covers " + std::to_string(part.n_points()) +
                               " points but sample has " + std::to_string(sample.size()));
    }

    FrameworkEstimates e;
    e.n_points = sample.size();
    e.a_plus = part.a_plus.size();
    e.a_minus = part.a_minus.size();
    e.n_plus = part.n_plus.size();
    e.n_minus = part.n_minus.size();
    e.n_anomalies = e.a_plus + e.a_minus;

    e.est_recall_off =
        e.n_anomalies == 0 ? 0.0 : static_cast<double>(e.a_minus) / static_cast<double>(e.n_anomalies);
    const std::size_t off_manifold = e.a_minus + e.n_minus;
    e.est_precision_off =
        off_manifold == 0 ? 0.0 : static_cast<double>(e.a_minus) / static_cast<double>(off_manifold);

    const ConfusionCounts c_on = confusion(on_flags, sample);
    const ConfusionCounts c_off = confusion(off_flags, sample);
    const detect::FlagSet united = detect::combine_flags({on_flags, off_flags});
    const ConfusionCounts c_union = confusion(united, sample);

    e.measured_recall_on = recall(c_on);
    e.measured_recall_off = recall(c_off);
    e.measured_precision_off = precision(c_off);
    e.measured_recall_union = recall(c_union);
    e.measured_precision_union = precision(c_union);
    return e;
}

CodReport curse_of_dim_demo(std::size_t dim, std::size_t n_pairs, std::uint64_t seed) {
    if (dim == 0) throw InvalidParams("dimension must be >= 1");
    if (n_pairs < 2) throw InvalidParams("need at least 2 pairs for a sample std");

    constexpr std::size_t kChunk = 4096;
    constexpr double kBinWidth = 0.25;
    const std::size_t n_chunks = (n_pairs + kChunk - 1) / kChunk;
    // Gaussian radii concentrate near sqrt(dim); leave generous headroom.
    const std::size_t n_bins =
        static_cast<std::size_t>((std::sqrt(static_cast<double>(dim)) + 16.0) / kBinWidth) + 1;

    std::vector<double> d2(n_pairs);
    std::vector<std::vector<std::size_t>> partial_hist(n_chunks);

#pragma omp parallel for schedule(static)
    for (long long ci = 0; ci < static_cast<long long>(n_chunks); ++ci) {
        const std::size_t c = static_cast<std::size_t>(ci);
        Rng rng(derive_seed(seed, c));
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(n_pairs, lo + kChunk);
        std::vector<double> a(dim), b(dim);
        std::vector<std::size_t> hist(n_bins, 0);
        for (std::size_t p = lo; p < hi; ++p) {
            for (std::size_t j = 0; j < dim; ++j) a[j] = rng.uniform();
            for (std::size_t j = 0; j < dim; ++j) b[j] = rng.uniform();
            double s = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = a[j] - b[j];
                s += d * d;
            }
            d2[p] = s;

            double r2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double g = rng.normal();
                r2 += g * g;
            }
            std::size_t bin = static_cast<std::size_t>(std::sqrt(r2) / kBinWidth);
            if (bin >= n_bins) bin = n_bins - 1;
            ++hist[bin];
        }
        partial_hist[c] = std::move(hist);
    }

    std::vector<std::size_t> hist(n_bins, 0);
    for (std::size_t c = 0; c < n_chunks; ++c) {
        for (std::size_t bin = 0; bin < n_bins; ++bin) hist[bin] += partial_hist[c][bin];
    }

    double sum = 0.0;
    for (double v : d2) sum += v;
    const double mean = sum / static_cast<double>(n_pairs);
    double ss = 0.0;
    for (double v : d2) ss += (v - mean) * (v - mean);

    std::size_t best = 0;
    for (std::size_t bin = 1; bin < n_bins; ++bin) {
        if (hist[bin] > hist[best]) best = bin;  // ties keep the lower bin
    }

    CodReport rep;
    rep.dim = dim;
    rep.n_pairs = n_pairs;
    rep.mean_sq_dist = mean;
    rep.std_sq_dist = std::sqrt(ss / static_cast<double>(n_pairs - 1));
    rep.gaussian_peak_radius = (static_cast<double>(best) + 0.5) * kBinWidth;
    rep.seed = seed;
    return rep;
}

void to_json(nlohmann::json& j, const PartitionReport& r) {
    j = nlohmann::json{{"manifold_id", r.manifold_id},
                       {"tau", r.tau},
                       {"n_points", r.n_points()},
                       {"n_anomalies", r.n_anomalies()},
                       {"card", {{"a_plus", r.a_plus.size()},
                                 {"a_minus", r.a_minus.size()},
                                 {"n_plus", r.n_plus.size()},
                                 {"n_minus", r.n_minus.size()}}},
                       {"a_plus", r.a_plus},
                       {"a_minus", r.a_minus},
                       {"n_plus", r.n_plus},
                       {"n_minus", r.n_minus}};
}

void to_json(nlohmann::json& j, const RegimeDiagnostics& r) {
    j = nlohmann::json{{"latent_dim", r.latent_dim},
                       {"input_dim", r.input_dim},
                       {"ratio_a", r.ratio_a},
                       {"ratio_n", r.ratio_n},
                       {"regime", r.regime_label}};
}

void to_json(nlohmann::json& j, const FrameworkEstimates& r) {
    j = nlohmann::json{{"n_points", r.n_points},
                       {"n_anomalies", r.n_anomalies},
                       {"a_plus", r.a_plus},
                       {"a_minus", r.a_minus},
                       {"n_plus", r.n_plus},
                       {"n_minus", r.n_minus},
                       {"est_recall_off", r.est_recall_off},
                       {"est_precision_off", r.est_precision_off},
                       {"measured_recall_on", r.measured_recall_on},
                       {"measured_recall_off", r.measured_recall_off},
                       {"measured_precision_off", r.measured_precision_off},
                       {"measured_recall_union", r.measured_recall_union},
                       {"measured_precision_union", r.measured_precision_union}};
}

void to_json(nlohmann::json& j, const CodReport& r) {
    j = nlohmann::json{{"dim", r.dim},
                       {"n_pairs", r.n_pairs},
                       {"mean_sq_dist", r.mean_sq_dist},
                       {"std_sq_dist", r.std_sq_dist},
                       {"gaussian_peak_radius", r.gaussian_peak_radius},
                       {"seed", r.seed}};
}

}  // namespace pegasus
