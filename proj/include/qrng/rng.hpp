#pragma once

#include <cstdint>
#include <random>

namespace qrng {

/// SplitMix64 finalizer; used to derive independent per-chunk seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for shard `index` of a stream rooted at `root`.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept;

// std::mt19937_64 is bit-exact across standard libraries, but the std distributions are
// not. The variate transforms below are fixed so traces are reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (-pi, pi].
    double uniform_phase();

    double normal(double mean, double sd);

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace qrng
