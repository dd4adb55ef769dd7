#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qrng/errors.hpp"
#include "qrng/noise_model.hpp"
#include "qrng/rng.hpp"

using namespace qrng;

namespace {

std::vector<double> gaussian_samples(std::size_t count, double mean, double sd, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(count);
    for (auto& x : v) x = rng.normal(mean, sd);
    return v;
}

}  // namespace

TEST_CASE("all-zero channel gives zero bounds") {
    const auto ch = NoiseChannel::empirical(TraceChannel::Electrical, std::vector<double>(20'000, 0.0));
    const NoiseBounds b = estimate_bounds(ch, 0.999);
    CHECK(b.n_min_mv == 0.0);
    CHECK(b.n_max_mv == 0.0);
    CHECK(b.confidence == 0.999);
}

TEST_CASE("parametric Gaussian bounds match the inverse normal CDF") {
    const double z = oracle::normal_quantile(1.0 - 0.5 * (1.0 - 0.999999));
    CHECK(z == doctest::Approx(4.892).epsilon(1e-3));
    for (double sd : {0.468, 1.0, 3.7}) {
        const NoiseBounds b =
            estimate_bounds(NoiseChannel::gaussian(TraceChannel::Electrical, 0.0, sd), 0.999999);
        CHECK(std::abs(b.n_max_mv - z * sd) < 1e-3 * sd);
        CHECK(std::abs(b.n_min_mv + z * sd) < 1e-3 * sd);
    }
    const NoiseBounds zero =
        estimate_bounds(NoiseChannel::gaussian(TraceChannel::Electrical, 0.0, 0.0), 0.99);
    CHECK(zero.n_min_mv == 0.0);
    CHECK(zero.n_max_mv == 0.0);
}

TEST_CASE("empirical quantiles follow the linear-interpolation convention") {
    // 0..9999 shuffled: quantile p sits at p * 9999.
    std::vector<double> v(10'000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i) - 5000.0;
    std::shuffle(v.begin(), v.end(), std::mt19937_64(3));
    const NoiseBounds b = estimate_bounds(NoiseChannel::empirical(TraceChannel::Electrical, v), 0.99);
    CHECK(b.n_min_mv == doctest::Approx(0.005 * 9999 - 5000.0));
    CHECK(b.n_max_mv == doctest::Approx(0.995 * 9999 - 5000.0));
}

TEST_CASE("asymmetric empirical data keeps its asymmetry") {
    auto v = gaussian_samples(200'000, 0.0, 1.0, 4);
    for (auto& x : v) {
        if (x > 0) x *= 0.8;
    }
    const NoiseBounds b = estimate_bounds(NoiseChannel::empirical(TraceChannel::IntensityLD2, v), 0.999);
    CHECK(b.n_max_mv < 0.85 * -b.n_min_mv);
}

TEST_CASE("replayed electrical noise reproduces +-2.29 mV") {
    const double sd = 2.29 / 4.892;
    const auto ch = NoiseChannel::empirical(TraceChannel::Electrical,
                                            gaussian_samples(100'000'000, 0.0, sd, 2024));
    const NoiseBounds b = estimate_bounds(ch, 0.999999);
    CHECK(std::abs(b.n_min_mv + 2.29) < 0.05);
    CHECK(std::abs(b.n_max_mv - 2.29) < 0.05);
}

TEST_CASE("symmetric empirical data gives nearly symmetric bounds") {
    const auto ch = NoiseChannel::empirical(TraceChannel::Electrical,
                                            gaussian_samples(1'000'000, 0.0, 1.0, 99));
    const NoiseBounds b = estimate_bounds(ch, 0.999);
    CHECK(std::abs(std::abs(b.n_min_mv) - std::abs(b.n_max_mv)) <
          0.05 * std::max(std::abs(b.n_min_mv), b.n_max_mv));
}

TEST_CASE("raising confidence never narrows the interval") {
    const auto ch = NoiseChannel::empirical(TraceChannel::Electrical,
                                            gaussian_samples(300'000, 0.1, 1.3, 5));
    const auto g = NoiseChannel::gaussian(TraceChannel::Electrical, 0.1, 1.3);
    double prev_lo = 0, prev_hi = 0, prev_glo = 0, prev_ghi = 0;
    for (double c : {0.6, 0.9, 0.99, 0.999, 0.9999, 0.99999}) {
        const NoiseBounds b = estimate_bounds(ch, c);
        const NoiseBounds gb = estimate_bounds(g, c);
        CHECK(b.n_min_mv <= prev_lo);
        CHECK(b.n_max_mv >= prev_hi);
        CHECK(gb.n_min_mv <= prev_glo);
        CHECK(gb.n_max_mv >= prev_ghi);
        prev_lo = b.n_min_mv;
        prev_hi = b.n_max_mv;
        prev_glo = gb.n_min_mv;
        prev_ghi = gb.n_max_mv;
    }
}

TEST_CASE("bounds always contain zero") {
    const auto shifted = NoiseChannel::empirical(TraceChannel::Electrical,
                                                 gaussian_samples(20'000, 50.0, 1.0, 6));
    const NoiseBounds b = estimate_bounds(shifted, 0.99);
    CHECK(b.n_min_mv == 0.0);
    CHECK(b.n_max_mv > 50.0);
    CHECK_NOTHROW(b.validate());
}

TEST_CASE("estimate_bounds preconditions") {
    const auto small = NoiseChannel::empirical(TraceChannel::Electrical, gaussian_samples(9'999, 0, 1, 1));
    CHECK_THROWS_AS(estimate_bounds(small, 0.9), InsufficientData);
    const auto mid = NoiseChannel::empirical(TraceChannel::Electrical, gaussian_samples(100'000, 0, 1, 1));
    CHECK_NOTHROW(estimate_bounds(mid, 0.99998));
    CHECK_THROWS_AS(estimate_bounds(mid, 0.999999), InsufficientData);
    CHECK_THROWS_AS(estimate_bounds(mid, 0.5), InvalidParameter);
    CHECK_THROWS_AS(estimate_bounds(mid, 1.0), InvalidParameter);
    CHECK_THROWS_AS(NoiseChannel::gaussian(TraceChannel::Electrical, 0, -1), InvalidParameter);
}

TEST_CASE("combining the three reference channel bounds") {
    const std::vector<NoiseBounds> parts{
        {-2.29, 2.29, 0.999999}, {-1.88, 1.88, 0.999999}, {-2.07, 2.04, 0.999999}};
    const NoiseBounds total = combine_bounds(parts);
    CHECK(total.n_min_mv == doctest::Approx(-6.24).epsilon(1e-12));
    CHECK(total.n_max_mv == doctest::Approx(6.21).epsilon(1e-12));
    CHECK(total.confidence == 0.999999);
}

TEST_CASE("combine_bounds identities and errors") {
    const NoiseBounds a{-1.5, 1.5, 0.99};
    const std::vector<NoiseBounds> one{a};
    CHECK(combine_bounds(one).n_min_mv == a.n_min_mv);
    CHECK(combine_bounds(one).n_max_mv == a.n_max_mv);
    const std::vector<NoiseBounds> with_zero{a, {0.0, 0.0, 0.99}};
    CHECK(combine_bounds(with_zero).n_min_mv == -1.5);
    CHECK(combine_bounds(with_zero).n_max_mv == 1.5);
    CHECK_THROWS_AS(combine_bounds(std::vector<NoiseBounds>{}), InvalidParameter);
    const std::vector<NoiseBounds> mixed{a, {-1, 1, 0.999}};
    CHECK_THROWS_AS(combine_bounds(mixed), InvalidParameter);
}

TEST_CASE("combine_bounds is associative and commutative") {
    std::mt19937_64 gen(12);
    // Quarter-millivolt values keep every partial sum exact.
    std::uniform_int_distribution<int> u(0, 40);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<NoiseBounds> p(3);
        for (auto& b : p) b = {-0.25 * u(gen), 0.25 * u(gen), 0.999};
        const NoiseBounds abc = combine_bounds(p);
        const std::vector<NoiseBounds> ab{p[0], p[1]};
        const std::vector<NoiseBounds> left{combine_bounds(ab), p[2]};
        const std::vector<NoiseBounds> bc{p[1], p[2]};
        const std::vector<NoiseBounds> right{p[0], combine_bounds(bc)};
        const std::vector<NoiseBounds> rev{p[2], p[0], p[1]};
        for (const auto& other : {combine_bounds(left), combine_bounds(right), combine_bounds(rev)}) {
            CHECK(other.n_min_mv == abc.n_min_mv);
            CHECK(other.n_max_mv == abc.n_max_mv);
        }
    }
}

TEST_CASE("interferometer drift") {
    CHECK(interferometer_drift(50e-9, 180.0) == doctest::Approx(8.727e-10).epsilon(1e-3));
    CHECK(interferometer_drift(2e-9, 180.0) == doctest::Approx(3.49e-11).epsilon(1e-3));
    CHECK(interferometer_drift(1e-300, 180.0) < 1e-299);
    CHECK_THROWS_AS(interferometer_drift(0.0, 180.0), InvalidParameter);
    CHECK_THROWS_AS(interferometer_drift(1e-9, -1.0), InvalidParameter);
}

TEST_CASE("drift negligibility") {
    const DriftReport r = drift_negligibility_check(interferometer_drift(50e-9, 180.0));
    CHECK(r.negligible);
    CHECK(r.fraction_of_cycle == doctest::Approx(8.727e-10 / (2 * 3.141592653589793)).epsilon(1e-3));
    CHECK_FALSE(drift_negligibility_check(1e-6, 1e-6).negligible);
    CHECK_FALSE(drift_negligibility_check(1.0).negligible);
}
