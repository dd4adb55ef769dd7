#pragma once

// Reference computations used only by the tests. Nothing here calls into the library
// code path it is used to check.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
    explicit GaussLegendre(int order);
};

/// Integral of f over [a, b] where f may have inverse-square-root singularities at
/// either end. Each half is mapped through q = end +- s^2, which removes the singularity,
/// then integrated with composite Gauss-Legendre.
double integrate_edge_singular(const std::function<double(double)>& f, double a, double b,
                               int panels = 64);

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Standard normal upper-tail quantile found by bisection on erfc.
double normal_quantile(double p);

/// Regularized upper incomplete gamma Q(a, x): series for x < a + 1, continued fraction
/// otherwise.
double gamma_q(double a, double x);

/// Dense GF(2) Toeplitz product built straight from the definition
/// T[i][j] = seed[i - j + n - 1], one bit per element.
std::vector<std::uint8_t> toeplitz_dense(const std::vector<std::uint8_t>& seed_bits,
                                         const std::vector<std::uint8_t>& input_bits,
                                         std::size_t m);

/// Biased autocorrelation at one lag, straight from the definition.
double autocorr_direct(std::span<const double> x, std::size_t lag);

}  // namespace oracle
