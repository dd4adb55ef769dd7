#include "qrng/rng.hpp"

#include <cmath>
#include <numbers>

namespace qrng {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
    return mix64(mix64(root) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

double Rng::uniform_phase() {
    // u in [0, 1) maps to (-pi, pi].
    return std::numbers::pi * (1.0 - 2.0 * uniform());
}

double Rng::normal(double mean, double sd) {
    if (has_cached_) {
        has_cached_ = false;
        return mean + sd * cached_;
    }
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(t);
    has_cached_ = true;
    return mean + sd * r * std::cos(t);
}

}  // namespace qrng
