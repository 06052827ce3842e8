#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pegasus/errors.hpp"

namespace pegasus {

// Linearly interpolated quantile (the "type 7" convention), pinned here so
// every module resolves quantiles identically. q in [0,1].
inline double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidParams("quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidParams("quantile: q must lie in [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw InvalidParams("mean_of: empty input");
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

// Sample standard deviation (n−1 denominator).
inline double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) throw InvalidParams("stddev_of: need at least 2 values");
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

} // namespace pegasus
