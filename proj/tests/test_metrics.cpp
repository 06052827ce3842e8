#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "pegasus/errors.hpp"
#include "pegasus/metrics.hpp"
#include "pegasus/rng.hpp"

using namespace pegasus;
using detect::FlagSet;

namespace {

data::ContaminatedSample make_sample(const std::vector<std::uint8_t>& is_anomaly) {
    data::ContaminatedSample s;
    const std::size_t n = is_anomaly.size();
    s.X = Matrix(n, 1);
    s.labels.assign(n, 0);
    s.is_anomaly = is_anomaly;
    return s;
}

FlagSet make_flags(std::vector<std::size_t> idx, std::size_t n_points) {
    FlagSet f;
    std::sort(idx.begin(), idx.end());
    f.indices = std::move(idx);
    f.k = f.indices.size();
    f.n_points = n_points;
    return f;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("a worked confusion example") {
    const auto sample = make_sample({1, 1, 0, 0, 0, 1, 0, 0});
    const auto flags = make_flags({0, 2, 5, 6}, 8);
    const ConfusionCounts c = confusion(flags, sample);
    CHECK(c.tp == 2);  // 0, 5
    CHECK(c.fp == 2);  // 2, 6
    CHECK(c.fn == 1);  // 1
    CHECK(c.tn == 3);  // 3, 4, 7
    CHECK(c.total() == 8);
    CHECK(recall(c) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(precision(c) == doctest::Approx(0.5).epsilon(1e-12));
    const double p = 0.5, r = 2.0 / 3.0;
    CHECK(f1_score(c) == doctest::Approx(2.0 * p * r / (p + r)).epsilon(1e-12));
}

TEST_CASE("randomized cases satisfy the confusion identities") {
    Rng rng(20260814);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(40);
        std::vector<std::uint8_t> truth(n);
        for (auto& t : truth) t = rng.uniform_int(4) == 0 ? 1 : 0;

        std::set<std::size_t> chosen;
        const std::size_t n_flags = rng.uniform_int(n + 1);
        for (std::size_t f : rng.sample_without_replacement(n, n_flags)) chosen.insert(f);

        const auto sample = make_sample(truth);
        const auto flags =
            make_flags(std::vector<std::size_t>(chosen.begin(), chosen.end()), n);
        const ConfusionCounts c = confusion(flags, sample);

        std::size_t n_anom = 0;
        for (auto t : truth) n_anom += t;

        CHECK(c.total() == n);
        CHECK(c.tp + c.fn == n_anom);
        CHECK(c.tp + c.fp == chosen.size());

        // independent set-based recount
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool f = chosen.count(i) > 0;
            const bool a = truth[i] != 0;
            tp += f && a;
            fp += f && !a;
            fn += !f && a;
            tn += !f && !a;
        }
        CHECK(c.tp == tp);
        CHECK(c.fp == fp);
        CHECK(c.fn == fn);
        CHECK(c.tn == tn);

        if (n_anom > 0)
            CHECK(recall(c) == doctest::Approx(double(tp) / double(n_anom)).epsilon(1e-12));
        if (!chosen.empty())
            CHECK(precision(c) ==
                  doctest::Approx(double(tp) / double(chosen.size())).epsilon(1e-12));
    }
}

TEST_CASE("zero-denominator conventions") {
    ConfusionCounts none{0, 0, 0, 5};
    CHECK(recall(none) == 0.0);
    CHECK(precision(none) == 0.0);
    CHECK(f1_score(none) == 0.0);

    ConfusionCounts no_flags{0, 0, 3, 5};
    CHECK(precision(no_flags) == 0.0);
    CHECK(recall(no_flags) == 0.0);
    CHECK(f1_score(no_flags) == 0.0);

    ConfusionCounts no_anomalies{0, 4, 0, 5};
    CHECK(recall(no_anomalies) == 0.0);
    CHECK(precision(no_anomalies) == 0.0);

    ConfusionCounts perfect{4, 0, 0, 5};
    CHECK(recall(perfect) == 1.0);
    CHECK(precision(perfect) == 1.0);
    CHECK(f1_score(perfect) == 1.0);
}

TEST_CASE("confusion validates the flag set against the sample") {
    const auto sample = make_sample({1, 0, 0});

    auto oob = make_flags({3}, 3);
    CHECK_THROWS_AS(confusion(oob, sample), IndexOutOfRange);

    auto mixed = make_flags({0}, 7);
    CHECK_THROWS_AS(confusion(mixed, sample), MixedDatasets);

    // n_points = 0 means "size unknown" and is accepted
    auto unsized = make_flags({0, 2}, 0);
    CHECK(confusion(unsized, sample).tp == 1);
}

}  // TEST_SUITE
