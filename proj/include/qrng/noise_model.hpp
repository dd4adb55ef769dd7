#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrng/source_model.hpp"

namespace qrng {

/// A classical noise channel, either recorded samples or a Normal(mean, sd) fit.
struct NoiseChannel {
    TraceChannel label = TraceChannel::Electrical;
    std::vector<double> samples_mv;
    struct Gaussian {
        double mean_mv = 0.0;
        double sd_mv = 0.0;
    };
    std::optional<Gaussian> parametric;

    static NoiseChannel empirical(TraceChannel label, std::vector<double> samples_mv);
    static NoiseChannel gaussian(TraceChannel label, double mean_mv, double sd_mv);
};

/// Worst-case interval of the classical noise at a stated confidence.
struct NoiseBounds {
    double n_min_mv = 0.0;
    double n_max_mv = 0.0;
    double confidence = 0.999999;

    double width_mv() const { return n_max_mv - n_min_mv; }
    bool contains(double n_mv) const { return n_mv >= n_min_mv && n_mv <= n_max_mv; }
    void validate() const;
};

inline constexpr std::size_t kMinNoiseSamples = 10'000;

/// Symmetric-tail quantile bounds: each tail gets (1 - confidence) / 2.
/// Empirical channels need at least max(1e4, 2 / (1 - confidence)) samples.
NoiseBounds estimate_bounds(const NoiseChannel& channel, double confidence);

/// Worst-case sum of independent channel bounds.
NoiseBounds combine_bounds(std::span<const NoiseBounds> parts);

/// Phase wander of the interferometer between adjacent samples: pi T_s / T_pi.
double interferometer_drift(double sample_period_s, double pi_drift_period_s);

struct DriftReport {
    double drift_rad = 0.0;
    double threshold_rad = 0.0;
    double fraction_of_cycle = 0.0;  // drift / 2 pi
    bool negligible = false;
};

inline constexpr double kDefaultDriftThresholdRad = 1e-6;
inline constexpr double kDefaultPiDriftPeriodS = 180.0;

DriftReport drift_negligibility_check(double drift_rad,
                                      double threshold_rad = kDefaultDriftThresholdRad);

}  // namespace qrng
