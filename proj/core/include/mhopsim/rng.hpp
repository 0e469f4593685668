#pragma once

#include <cstdint>
#include <random>

namespace mhop {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a base seed and a purpose tag,
/// so topology generation, flow selection and channel draws never share a
/// stream even when the user supplies a single run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ull * (tag + 1));
    splitmix64(s);
    return splitmix64(s);
}

/// Seeded generator with hand-rolled conversions. mt19937_64 output is
/// pinned by the standard; the std distributions are not, so we avoid them
/// to keep equal seeds producing equal draw sequences.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) { return engine_() % n; }

    /// One draw is consumed whether or not the trial succeeds.
    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace mhop
