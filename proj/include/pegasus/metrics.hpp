#pragma once

#include <cstddef>

#include "pegasus/dataset.hpp"
#include "pegasus/detectors/common.hpp"
#include "pegasus/errors.hpp"

namespace pegasus {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
};

// Flagged-vs-truth confusion over a labelled sample.  Flag indices must
// address rows of the sample.
inline ConfusionCounts confusion(const detect::FlagSet& flags, const data::ContaminatedSample& sample) {
    const std::size_t n = sample.size();
    if (flags.n_points != 0 && flags.n_points != n) {
        throw MixedDatasets("flag set covers " + std::to_string(flags.n_points) +
                            " points but sample has " + std::to_string(n));
    }
    ConfusionCounts c;
    std::vector<char> flagged(n, 0);
    for (std::size_t idx : flags.indices) {
        if (idx >= n) {
            throw IndexOutOfRange("flag index " + std::to_string(idx) +
                                  " out of range for sample of size " + std::to_string(n));
        }
        flagged[idx] = 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const bool truth = sample.is_anomaly[i] != 0;
        if (flagged[i]) {
            truth ? ++c.tp : ++c.fp;
        } else {
            truth ? ++c.fn : ++c.tn;
        }
    }
    return c;
}

// Zero-denominator convention: an empty flag set has precision 0, a sample
// with no anomalies has recall 0, and f1 is 0 whenever either factor is.
inline double recall(const ConfusionCounts& c) {
    const std::size_t denom = c.tp + c.fn;
    return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

inline double precision(const ConfusionCounts& c) {
    const std::size_t denom = c.tp + c.fp;
    return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

inline double f1_score(const ConfusionCounts& c) {
    const double p = precision(c);
    const double r = recall(c);
    return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace pegasus
