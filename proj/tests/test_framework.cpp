#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "pegasus/errors.hpp"
#include "pegasus/framework.hpp"
#include "pegasus/stats.hpp"

using namespace pegasus;
using detect::FlagSet;

namespace {

data::ContaminatedSample make_sample(const std::vector<std::uint8_t>& is_anomaly) {
    data::ContaminatedSample s;
    const std::size_t n = is_anomaly.size();
    s.X = Matrix(n, 1);
    s.labels.assign(n, 0);
    s.is_anomaly = is_anomaly;
    for (std::size_t i = 0; i < n; ++i) s.labels[i] = is_anomaly[i];
    s.bulk_class = 0;
    return s;
}

FlagSet make_flags(std::vector<std::size_t> idx, std::size_t n_points) {
    FlagSet f;
    std::sort(idx.begin(), idx.end());
    f.indices = std::move(idx);
    f.k = f.indices.size();
    f.n_points = n_points;
    f.source = "test";
    return f;
}

}  // namespace

TEST_SUITE("framework") {

TEST_CASE("absolute-tau partition splits exactly on re > tau") {
    const auto sample = make_sample({0, 0, 1, 0, 1, 0});
    const Vector re{0.1, 0.9, 0.2, 0.5, 0.8, 0.45};
    const auto part =
        partition_by_representation(re, sample, TauRule::absolute(0.5), "pca_m2");

    CHECK(part.tau == 0.5);
    CHECK(part.manifold_id == "pca_m2");
    CHECK(part.a_plus == std::vector<std::size_t>{2});   // anomaly, re 0.2 ≤ 0.5
    CHECK(part.a_minus == std::vector<std::size_t>{4});  // anomaly, re 0.8 > 0.5
    CHECK(part.n_plus == std::vector<std::size_t>{0, 3, 5});
    CHECK(part.n_minus == std::vector<std::size_t>{1});
    CHECK(part.n_points() == 6);
    CHECK(part.n_anomalies() == 2);

    // the four blocks partition the index range
    std::set<std::size_t> all;
    for (const auto* block : {&part.a_plus, &part.a_minus, &part.n_plus, &part.n_minus})
        all.insert(block->begin(), block->end());
    CHECK(all.size() == 6);
    CHECK(*all.rbegin() == 5);
}

TEST_CASE("quantile tau is computed over the normal points only") {
    const auto sample = make_sample({0, 0, 0, 0, 0, 1});
    // normals carry 1..5; the anomaly's enormous re must not move tau
    const Vector re{1.0, 2.0, 3.0, 4.0, 5.0, 1e6};
    const auto part = partition_by_representation(re, sample, TauRule::quantile(0.5));
    CHECK(part.tau == 3.0);  // median of {1..5}
    CHECK(part.n_minus == std::vector<std::size_t>{3, 4});
    CHECK(part.a_minus == std::vector<std::size_t>{5});

    // default rule is the 0.95 normal quantile
    const auto def = partition_by_representation(re, sample);
    Vector normals{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(def.tau == doctest::Approx(quantile(normals, 0.95)).epsilon(1e-12));
}

TEST_CASE("equal errors leave the poorly-represented side empty") {
    const auto sample = make_sample({0, 1, 0, 1, 0});
    const Vector re(5, 0.7);
    const auto part = partition_by_representation(re, sample, TauRule::quantile(0.9));
    CHECK(part.tau == 0.7);
    CHECK(part.a_minus.empty());
    CHECK(part.n_minus.empty());
    CHECK(part.a_plus.size() == 2);
    CHECK(part.n_plus.size() == 3);
}

TEST_CASE("partition validates its inputs") {
    const auto sample = make_sample({0, 1, 0});
    CHECK_THROWS_AS(partition_by_representation({0.1, 0.2}, sample), CoverageMismatch);
    CHECK_THROWS_AS(
        partition_by_representation({0.1, std::nan(""), 0.3}, sample), InvalidParams);

    CHECK_THROWS_AS(TauRule::quantile(0.0), InvalidParams);
    CHECK_THROWS_AS(TauRule::quantile(1.0), InvalidParams);
    CHECK_THROWS_AS(TauRule::absolute(-0.5), InvalidParams);
    CHECK_THROWS_AS(TauRule::absolute(std::numeric_limits<double>::infinity()), InvalidParams);

    // no normal points ⇒ no quantile threshold
    const auto all_anom = make_sample({1, 1, 1});
    CHECK_THROWS_AS(partition_by_representation({0.1, 0.2, 0.3}, all_anom), TooFewPoints);
    // the absolute rule has no such restriction
    CHECK_NOTHROW(
        partition_by_representation({0.1, 0.2, 0.3}, all_anom, TauRule::absolute(0.2)));
}

TEST_CASE("regime diagnostics label the dimension gap and set ratios") {
    const auto sample = make_sample({1, 1, 1, 1, 0, 0});
    const Vector re{0.9, 0.9, 0.9, 0.1, 0.1, 0.9};
    const auto part = partition_by_representation(re, sample, TauRule::absolute(0.5));
    // a_minus = {0,1,2}, a_plus = {3}, n_minus = {5}, n_plus = {4}

    const auto deep = regime_diagnostics(part, 30, 784);
    CHECK(deep.regime_label == "M<<D");
    CHECK(deep.latent_dim == 30);
    CHECK(deep.input_dim == 784);
    CHECK(deep.ratio_a == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(deep.ratio_n == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(regime_diagnostics(part, 245, 784).regime_label == "M~D");
    // the cutoff comparison is strict
    CHECK(regime_diagnostics(part, 2, 10).regime_label == "M~D");
    CHECK(regime_diagnostics(part, 2, 11).regime_label == "M<<D");

    // empty denominators
    PartitionReport p2;
    p2.a_minus = {0};
    p2.n_plus = {1};
    const auto d2 = regime_diagnostics(p2, 5, 100);
    CHECK(std::isinf(d2.ratio_a));
    CHECK(d2.ratio_n == 0.0);

    CHECK_THROWS_AS(regime_diagnostics(part, 0, 10), InvalidParams);
    CHECK_THROWS_AS(regime_diagnostics(part, 11, 10), InvalidParams);
    CHECK_THROWS_AS(regime_diagnostics(part, 2, 10, 0.0), InvalidParams);
    CHECK_THROWS_AS(regime_diagnostics(part, 2, 10, 1.5), InvalidParams);
}

TEST_CASE("framework estimates compute partition-implied and measured rates") {
    //               0  1  2  3  4  5  6  7  8  9
    const auto sample = make_sample({1, 1, 1, 0, 0, 0, 0, 0, 0, 0});
    const Vector re{0.9, 0.9, 0.1, 0.1, 0.1, 0.9, 0.1, 0.1, 0.1, 0.1};
    const auto part = partition_by_representation(re, sample, TauRule::absolute(0.5));
    // a_minus = {0,1}, a_plus = {2}, n_minus = {5}, n_plus = rest

    const FlagSet on = make_flags({2, 3}, 10);   // catches the on-manifold anomaly
    const FlagSet off = make_flags({0, 1, 5}, 10);

    const auto e = framework_estimates(part, on, off, sample);
    CHECK(e.n_points == 10);
    CHECK(e.n_anomalies == 3);
    CHECK(e.a_minus == 2);
    CHECK(e.a_plus == 1);
    CHECK(e.n_minus == 1);
    CHECK(e.n_plus == 6);

    CHECK(e.est_recall_off == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(e.est_precision_off == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    CHECK(e.measured_recall_on == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(e.measured_recall_off == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(e.measured_precision_off == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    // union = {0,1,2,3,5}: all three anomalies, two false alarms
    CHECK(e.measured_recall_union == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.measured_precision_union == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("framework estimate edge conventions") {
    // anomalies poorly represented, no normal above tau ⇒ ideal off detector
    const auto sample = make_sample({1, 1, 0, 0, 0});
    const Vector re{0.9, 0.8, 0.1, 0.2, 0.1};
    const auto part = partition_by_representation(re, sample, TauRule::absolute(0.5));
    const FlagSet on = make_flags({}, 5);
    const FlagSet off = make_flags({0, 1}, 5);
    const auto e = framework_estimates(part, on, off, sample);
    CHECK(e.est_recall_off == 1.0);
    CHECK(e.est_precision_off == 1.0);  // n_minus is empty
    CHECK(e.measured_recall_off == 1.0);
    CHECK(e.measured_precision_off == 1.0);
    CHECK(e.measured_recall_on == 0.0);

    // nothing above tau at all ⇒ both estimates fall back to zero
    const auto flat = partition_by_representation({0.1, 0.1, 0.1, 0.1, 0.1}, sample,
                                                  TauRule::absolute(0.5));
    const auto ez = framework_estimates(flat, on, off, sample);
    CHECK(ez.est_recall_off == 0.0);
    CHECK(ez.est_precision_off == 0.0);

    PartitionReport truncated;
    truncated.a_plus = {0};
    CHECK_THROWS_AS(framework_estimates(truncated, on, off, sample), CoverageMismatch);
}

TEST_CASE("cod demo concentrates distances as the dimension grows") {
    const auto rep = curse_of_dim_demo(6, 20000, 4242);
    CHECK(rep.dim == 6);
    CHECK(rep.n_pairs == 20000);
    CHECK(rep.seed == 4242);
    // E[d²] = D/6, sd = √(7D/180); se of the mean ≈ 0.0034
    CHECK(std::abs(rep.mean_sq_dist - 1.0) < 0.014);
    const double sd = std::sqrt(7.0 * 6.0 / 180.0);
    CHECK(std::abs(rep.std_sq_dist - sd) < 0.15 * sd);

    // the relative spread shrinks with dimension
    const auto wide = curse_of_dim_demo(600, 20000, 4242);
    CHECK(wide.mean_sq_dist == doctest::Approx(100.0).epsilon(0.02));
    CHECK(wide.std_sq_dist / wide.mean_sq_dist <
          0.5 * rep.std_sq_dist / rep.mean_sq_dist);
}

TEST_CASE("cod gaussian mode sits at sqrt(dim minus one)") {
    const auto rep = curse_of_dim_demo(4, 20000, 7);
    // χ₄ mode = √3 ≈ 1.73; accept the two 0.25-wide bins around it
    CHECK((rep.gaussian_peak_radius == doctest::Approx(1.625) ||
           rep.gaussian_peak_radius == doctest::Approx(1.875)));
}

TEST_CASE("cod demo is deterministic and chunk-boundary clean") {
    const auto a = curse_of_dim_demo(5, 5000, 11);
    const auto b = curse_of_dim_demo(5, 5000, 11);
    CHECK(a.mean_sq_dist == b.mean_sq_dist);
    CHECK(a.std_sq_dist == b.std_sq_dist);
    CHECK(a.gaussian_peak_radius == b.gaussian_peak_radius);
    CHECK(curse_of_dim_demo(5, 5000, 12).mean_sq_dist != a.mean_sq_dist);

    // exactly one chunk plus one element
    const auto c = curse_of_dim_demo(3, 4097, 2);
    CHECK(c.n_pairs == 4097);
    CHECK(std::isfinite(c.std_sq_dist));

    CHECK_THROWS_AS(curse_of_dim_demo(0, 100, 1), InvalidParams);
    CHECK_THROWS_AS(curse_of_dim_demo(3, 1, 1), InvalidParams);
}

TEST_CASE("framework reports serialize to json") {
    const auto sample = make_sample({1, 0, 0});
    const auto part =
        partition_by_representation({0.9, 0.1, 0.2}, sample, TauRule::absolute(0.5), "ae_m30");
    nlohmann::json pj = part;
    CHECK(pj["manifold_id"] == "ae_m30");
    CHECK(pj["card"]["a_minus"] == 1);
    CHECK(pj["a_minus"][0] == 0);

    nlohmann::json rj = regime_diagnostics(part, 30, 784);
    CHECK(rj["regime"] == "M<<D");

    nlohmann::json ej =
        framework_estimates(part, make_flags({0}, 3), make_flags({0}, 3), sample);
    CHECK(ej["measured_recall_union"] == 1.0);

    nlohmann::json cj = curse_of_dim_demo(3, 100, 5);
    CHECK(cj["dim"] == 3);
    CHECK(cj["n_pairs"] == 100);
}

}  // TEST_SUITE
