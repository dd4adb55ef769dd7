#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

GaussLegendre::GaussLegendre(int order) : nodes(order), weights(order) {
    for (int i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

double integrate_edge_singular(const std::function<double(double)>& f, double a, double b,
                               int panels) {
    static const GaussLegendre gl(20);
    const double mid = 0.5 * (a + b);
    auto half = [&](double end, double sign) {
        // q = end + sign * s^2 for s in [0, sqrt(|mid - end|)], dq = 2 s ds.
        const double smax = std::sqrt(std::abs(mid - end));
        double total = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double lo = smax * p / panels;
            const double hi = smax * (p + 1) / panels;
            const double c = 0.5 * (lo + hi);
            const double r = 0.5 * (hi - lo);
            for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                const double s = c + r * gl.nodes[i];
                total += gl.weights[i] * r * f(end + sign * s * s) * 2.0 * s;
            }
        }
        return total;
    };
    return half(a, 1.0) + half(b, -1.0);
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - i / n));
        d = std::max(d, std::abs((i + 1) / n - f));
    }
    return d;
}

double normal_quantile(double p) {
    // Solve 0.5 erfc(z / sqrt 2) = 1 - p.
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double z = 0.5 * (lo + hi);
        const double upper = 0.5 * std::erfc(z / std::numbers::sqrt2);
        if (upper > 1.0 - p) {
            lo = z;
        } else {
            hi = z;
        }
    }
    return 0.5 * (lo + hi);
}

double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("gamma_q domain");
    if (x == 0) return 1.0;
    const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 100000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-17) break;
        }
        return 1.0 - sum * std::exp(log_prefix);
    }
    // Lentz continued fraction.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(log_prefix) * h;
}

std::vector<std::uint8_t> toeplitz_dense(const std::vector<std::uint8_t>& seed_bits,
                                         const std::vector<std::uint8_t>& input_bits,
                                         std::size_t m) {
    const std::size_t n = input_bits.size();
    if (seed_bits.size() != n + m - 1) throw std::invalid_argument("seed length");
    std::vector<std::vector<std::uint8_t>> t(m, std::vector<std::uint8_t>(n));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) t[i][j] = seed_bits[i + n - 1 - j];
    }
    std::vector<std::uint8_t> out(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        unsigned acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc += t[i][j] & input_bits[j];
        out[i] = static_cast<std::uint8_t>(acc & 1u);
    }
    return out;
}

double autocorr_direct(std::span<const double> x, std::size_t lag) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    double cov = 0.0;
    for (std::size_t i = 0; i + lag < x.size(); ++i) cov += (x[i] - mean) * (x[i + lag] - mean);
    return cov / n / var;
}

}  // namespace oracle
