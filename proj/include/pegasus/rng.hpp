#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pegasus {

// splitmix64 step; advances the state and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable child-seed derivation: injective in `stream` for a fixed root, so
// per-unit streams (trees, chunks, subsets) never collide and never depend on
// how much of the parent stream was consumed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t s = root + 0x9e3779b97f4a7c15ULL * (stream + 1);
    return splitmix64(s);
}

// Deterministic RNG with pinned output transforms. mt19937_64 is fully
// specified by the standard; the uniform/normal transforms below are our own
// so streams do not depend on library implementation details
// (std::uniform_real_distribution / std::normal_distribution are not
// reproducible across standard libraries).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); unbiased bitmask rejection. n == 1 consumes
    // no randomness.
    std::uint64_t uniform_int(std::uint64_t n);

    // Standard normal via Marsaglia's polar method (log/sqrt only; caches the
    // spare deviate).
    double normal();
    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    // Fresh, state-independent child stream.
    Rng derive(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

    // k distinct indices from 0..n-1 in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace pegasus
