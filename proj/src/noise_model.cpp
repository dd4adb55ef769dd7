#include "qrng/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "qrng/errors.hpp"

namespace qrng {

namespace {

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double sorted_quantile(const std::vector<double>& sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

NoiseChannel NoiseChannel::empirical(TraceChannel label, std::vector<double> samples_mv) {
    NoiseChannel c;
    c.label = label;
    c.samples_mv = std::move(samples_mv);
    return c;
}

NoiseChannel NoiseChannel::gaussian(TraceChannel label, double mean_mv, double sd_mv) {
    if (!(sd_mv >= 0.0)) throw InvalidParameter("noise sd must be nonnegative");
    NoiseChannel c;
    c.label = label;
    c.parametric = Gaussian{mean_mv, sd_mv};
    return c;
}

void NoiseBounds::validate() const {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw InvalidParameter("noise confidence must lie in (0, 1)");
    }
    if (!(n_min_mv <= 0.0 && n_max_mv >= 0.0)) {
        throw InvalidParameter("noise bounds must satisfy n_min <= 0 <= n_max");
    }
}

NoiseBounds estimate_bounds(const NoiseChannel& channel, double confidence) {
    if (!(confidence > 0.5 && confidence < 1.0)) {
        throw InvalidParameter("confidence must lie in (0.5, 1)");
    }
    const double tail = 0.5 * (1.0 - confidence);
    NoiseBounds out;
    out.confidence = confidence;

    if (channel.parametric) {
        const auto& g = *channel.parametric;
        if (g.sd_mv == 0.0) {
            out.n_min_mv = out.n_max_mv = g.mean_mv;
        } else {
            const boost::math::normal dist(g.mean_mv, g.sd_mv);
            out.n_min_mv = boost::math::quantile(dist, tail);
            out.n_max_mv = boost::math::quantile(boost::math::complement(dist, tail));
        }
    } else {
        const double needed = std::max<double>(kMinNoiseSamples, std::ceil(2.0 / (1.0 - confidence)));
        if (static_cast<double>(channel.samples_mv.size()) < needed) {
            throw InsufficientData("noise channel " + std::string(to_string(channel.label)) +
                                   " has " + std::to_string(channel.samples_mv.size()) +
                                   " samples; confidence " + std::to_string(confidence) +
                                   " needs " + std::to_string(static_cast<long long>(needed)));
        }
        std::vector<double> sorted = channel.samples_mv;
        std::sort(sorted.begin(), sorted.end());
        out.n_min_mv = sorted_quantile(sorted, tail);
        out.n_max_mv = sorted_quantile(sorted, 1.0 - tail);
    }
    // AC coupling makes the channels zero-mean; a residual offset is absorbed into the bounds.
    out.n_min_mv = std::min(out.n_min_mv, 0.0);
    out.n_max_mv = std::max(out.n_max_mv, 0.0);
    return out;
}

NoiseBounds combine_bounds(std::span<const NoiseBounds> parts) {
    if (parts.empty()) throw InvalidParameter("combine_bounds needs at least one part");
    NoiseBounds total;
    total.confidence = parts.front().confidence;
    total.n_min_mv = 0.0;
    total.n_max_mv = 0.0;
    for (const auto& p : parts) {
        if (p.confidence != total.confidence) {
            throw InvalidParameter("combine_bounds parts must share one confidence level");
        }
        total.n_min_mv += p.n_min_mv;
        total.n_max_mv += p.n_max_mv;
    }
    return total;
}

double interferometer_drift(double sample_period_s, double pi_drift_period_s) {
    if (!(sample_period_s > 0.0) || !(pi_drift_period_s > 0.0)) {
        throw InvalidParameter("drift inputs must be positive");
    }
    return std::numbers::pi * sample_period_s / pi_drift_period_s;
}

DriftReport drift_negligibility_check(double drift_rad, double threshold_rad) {
    DriftReport r;
    r.drift_rad = drift_rad;
    r.threshold_rad = threshold_rad;
    r.fraction_of_cycle = drift_rad / (2.0 * std::numbers::pi);
    r.negligible = std::abs(drift_rad) < threshold_rad;
    return r;
}

}  // namespace qrng
