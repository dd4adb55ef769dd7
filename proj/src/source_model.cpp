#include "qrng/source_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qrng/errors.hpp"
#include "qrng/parallel.hpp"
#include "qrng/rng.hpp"

namespace qrng {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidParameter(std::string(name) + " must be positive and finite");
    }
}

template <class Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::string_view (&names)[N], const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == text) return static_cast<Enum>(i);
    }
    throw InvalidParameter(std::string("unknown ") + what + " '" + std::string(text) + "'");
}

constexpr std::string_view kModeNames[] = {"ContinuousWave", "Pulsed"};
constexpr std::string_view kConfigNames[] = {"CwCw", "CwPulsed", "PulsedPulsed"};
constexpr std::string_view kChannelNames[] = {"QuantumSignal", "Electrical", "IntensityLD1",
                                              "IntensityLD2"};
constexpr std::string_view kLawNames[] = {"Arcsine", "Uniform"};

std::size_t chunk_count(std::size_t count) {
    return (count + kSimulationChunk - 1) / kSimulationChunk;
}

}  // namespace

std::string_view to_string(LaserMode mode) { return kModeNames[static_cast<int>(mode)]; }
std::string_view to_string(Configuration c) { return kConfigNames[static_cast<int>(c)]; }
std::string_view to_string(TraceChannel c) { return kChannelNames[static_cast<int>(c)]; }
std::string_view to_string(QuantumLaw law) { return kLawNames[static_cast<int>(law)]; }

LaserMode parse_laser_mode(std::string_view text) {
    return parse_enum<LaserMode>(text, kModeNames, "laser mode");
}
Configuration parse_configuration(std::string_view text) {
    return parse_enum<Configuration>(text, kConfigNames, "configuration");
}
TraceChannel parse_trace_channel(std::string_view text) {
    return parse_enum<TraceChannel>(text, kChannelNames, "trace channel");
}
QuantumLaw parse_quantum_law(std::string_view text) {
    return parse_enum<QuantumLaw>(text, kLawNames, "quantum law");
}

void LaserSpec::validate() const {
    require_positive(center_wavelength_nm, "center_wavelength_nm");
    require_positive(linewidth_3db_nm, "linewidth_3db_nm");
    require_positive(relative_amplitude, "relative_amplitude");
    if (mode == LaserMode::Pulsed) {
        require_positive(repetition_rate_hz, "repetition_rate_hz");
        require_positive(pulse_width_3db_ps, "pulse_width_3db_ps");
        if (pulse_width_jitter_sd_ps < 0.0) {
            throw InvalidParameter("pulse_width_jitter_sd_ps must be nonnegative");
        }
    }
}

void QuantumSignalModel::validate() const {
    require_positive(amplitude_mv, "amplitude_mv");
    if (!std::isfinite(center_mv)) throw InvalidParameter("center_mv must be finite");
}

void AnalogTrace::validate() const {
    require_positive(sample_period_s, "sample_period_s");
    if (samples_mv.empty()) throw InvalidParameter("trace has no samples");
}

double coherence_time_ps(const LaserSpec& laser) {
    require_positive(laser.center_wavelength_nm, "center_wavelength_nm");
    require_positive(laser.linewidth_3db_nm, "linewidth_3db_nm");
    const double lambda_m = laser.center_wavelength_nm * 1e-9;
    const double dlambda_m = laser.linewidth_3db_nm * 1e-9;
    return lambda_m * lambda_m / (kSpeedOfLight * dlambda_m) * 1e12;
}

double phase_variance(double sample_period, double tau1, double tau2) {
    if (!(sample_period >= 0.0)) throw InvalidParameter("sample_period must be nonnegative");
    require_positive(tau1, "tau1");
    require_positive(tau2, "tau2");
    return 2.0 * sample_period * (1.0 / tau1 + 1.0 / tau2);
}

double min_sampling_period(double tau1, double tau2) {
    require_positive(tau1, "tau1");
    require_positive(tau2, "tau2");
    return tau1 * tau2 / (2.0 * (tau1 + tau2));
}

double arcsine_pdf(double q_mv, const QuantumSignalModel& model) {
    model.validate();
    const double x = q_mv - model.center_mv;
    const double a = model.amplitude_mv;
    if (std::abs(x) > a) return 0.0;
    if (std::abs(x) == a) return std::numeric_limits<double>::infinity();
    // (a - x)(a + x) avoids cancellation in a^2 - x^2 near the edges.
    return 1.0 / (std::numbers::pi * std::sqrt((a - x) * (a + x)));
}

double arcsine_cdf(double q_mv, const QuantumSignalModel& model) {
    model.validate();
    const double x = q_mv - model.center_mv;
    const double a = model.amplitude_mv;
    if (x <= -a) return 0.0;
    if (x >= a) return 1.0;
    return std::asin(x / a) / std::numbers::pi + 0.5;
}

double quantum_pdf(double q_mv, const QuantumSignalModel& model) {
    if (model.law == QuantumLaw::Arcsine) return arcsine_pdf(q_mv, model);
    model.validate();
    return std::abs(q_mv - model.center_mv) <= model.amplitude_mv ? 0.5 / model.amplitude_mv
                                                                    : 0.0;
}

double quantum_cdf(double q_mv, const QuantumSignalModel& model) {
    if (model.law == QuantumLaw::Arcsine) return arcsine_cdf(q_mv, model);
    model.validate();
    const double u = (q_mv - model.lower_mv()) / (2.0 * model.amplitude_mv);
    return std::clamp(u, 0.0, 1.0);
}

double quantum_mass(double lo_mv, double hi_mv, const QuantumSignalModel& model) {
    if (!(hi_mv > lo_mv)) return 0.0;
    const double a = model.amplitude_mv;
    const double xl = std::max(lo_mv - model.center_mv, -a);
    const double xh = std::min(hi_mv - model.center_mv, a);
    if (!(xh > xl)) return 0.0;
    if (model.law == QuantumLaw::Uniform) return (xh - xl) / (2.0 * a);
    // Complementary forms keep precision for narrow intervals next to a singular edge.
    if (xl >= 0.0) {
        return (std::acos(xl / a) - std::acos(xh / a)) / std::numbers::pi;
    }
    if (xh <= 0.0) {
        return (std::acos(-xh / a) - std::acos(-xl / a)) / std::numbers::pi;
    }
    return (std::asin(xh / a) - std::asin(xl / a)) / std::numbers::pi;
}

double arcsine_quantile(double p, const QuantumSignalModel& model) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("probability must lie in [0, 1]");
    return model.center_mv + model.amplitude_mv * std::sin(std::numbers::pi * (p - 0.5));
}

double pulse_overlap(double offset_s, double fwhm1_s, double fwhm2_s) {
    require_positive(fwhm1_s, "fwhm1_s");
    require_positive(fwhm2_s, "fwhm2_s");
    const double s1 = fwhm1_s / kFwhmToSigma;
    const double s2 = fwhm2_s / kFwhmToSigma;
    const double mean_var = 0.5 * (s1 * s1 + s2 * s2);
    return std::exp(-offset_s * offset_s / (4.0 * mean_var));
}

AnalogTrace simulate_cw_cw(const LaserSpec& ld1, const LaserSpec& ld2, const BeatSpec& beat,
                           const QuantumSignalModel& model, double sample_period_s,
                           std::size_t count, std::uint64_t rng_seed, unsigned workers) {
    ld1.validate();
    ld2.validate();
    model.validate();
    require_positive(sample_period_s, "sample_period_s");
    if (count == 0) throw InvalidParameter("count must be positive");
    if (ld1.mode != LaserMode::ContinuousWave || ld2.mode != LaserMode::ContinuousWave) {
        throw ConfigurationError("mode", "CW+CW simulation requires two continuous-wave lasers");
    }
    if (beat.sd_hz < 0.0) throw InvalidParameter("beat sd must be nonnegative");

    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double tau1 = coherence_time_ps(ld1) * 1e-12;
    const double tau2 = coherence_time_ps(ld2) * 1e-12;
    const double step_sd = std::sqrt(phase_variance(sample_period_s, tau1, tau2));

    Rng beat_rng(derive_seed(rng_seed, ~std::uint64_t{0}));
    const double beat_hz = beat_rng.normal(beat.mean_hz, beat.sd_hz);
    const double beat_step = std::remainder(two_pi * beat_hz * sample_period_s, two_pi);

    AnalogTrace trace;
    trace.sample_period_s = sample_period_s;
    trace.config = Configuration::CwCw;
    trace.samples_mv.resize(count);

    // Pass 1: per-shard Wiener increments, stored as wrapped local phase.
    const std::size_t chunks = chunk_count(count);
    std::vector<double> chunk_total(chunks, 0.0);
    parallel_for(chunks, workers, [&](std::size_t c) {
        Rng rng(derive_seed(rng_seed, c));
        const std::size_t begin = c * kSimulationChunk;
        const std::size_t end = std::min(count, begin + kSimulationChunk);
        double phase = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            phase = std::remainder(phase + rng.normal(0.0, step_sd), two_pi);
            trace.samples_mv[i] = phase;
        }
        chunk_total[c] = phase;
    });

    // Shard c starts where shard c-1 ended; the prefix is sequential and cheap.
    std::vector<double> chunk_offset(chunks, 0.0);
    for (std::size_t c = 1; c < chunks; ++c) {
        chunk_offset[c] = std::remainder(chunk_offset[c - 1] + chunk_total[c - 1], two_pi);
    }

    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t begin = c * kSimulationChunk;
        const std::size_t end = std::min(count, begin + kSimulationChunk);
        for (std::size_t i = begin; i < end; ++i) {
            const double beat_phase = std::remainder(beat_step * static_cast<double>(i), two_pi);
            const double angle = beat_phase + chunk_offset[c] + trace.samples_mv[i];
            trace.samples_mv[i] = model.amplitude_mv * std::cos(angle) + model.center_mv;
        }
    });
    return trace;
}

double effective_amplitude(const LaserSpec& ld1, const LaserSpec& ld2,
                           const QuantumSignalModel& model, double arrival_offset_s) {
    if (ld1.mode == LaserMode::Pulsed && ld2.mode == LaserMode::Pulsed) {
        return model.amplitude_mv * pulse_overlap(arrival_offset_s, ld1.pulse_width_3db_ps * 1e-12,
                                                  ld2.pulse_width_3db_ps * 1e-12);
    }
    // A CW reference overlaps every pulse regardless of arrival time.
    return model.amplitude_mv;
}

AnalogTrace simulate_pulsed(const LaserSpec& ld1, const LaserSpec& ld2,
                            const QuantumSignalModel& model, const PulsedOptions& options,
                            std::size_t count, std::uint64_t rng_seed, unsigned workers) {
    ld1.validate();
    ld2.validate();
    model.validate();
    if (count == 0) throw InvalidParameter("count must be positive");
    const bool p1 = ld1.mode == LaserMode::Pulsed;
    const bool p2 = ld2.mode == LaserMode::Pulsed;
    if (!p1 && !p2) {
        throw ConfigurationError("mode", "pulsed simulation needs at least one pulsed laser");
    }
    if (!std::isfinite(options.arrival_offset_s)) {
        throw InvalidParameter("arrival_offset_s must be finite");
    }
    double rate = p1 ? ld1.repetition_rate_hz : ld2.repetition_rate_hz;
    if (p1 && p2) {
        const double diff = std::abs(ld1.repetition_rate_hz - ld2.repetition_rate_hz);
        if (diff > 1e-9 * std::max(ld1.repetition_rate_hz, ld2.repetition_rate_hz)) {
            throw ConfigurationError("repetition_rate_hz",
                                     "pulsed+pulsed requires equal repetition rates");
        }
    }

    AnalogTrace trace;
    trace.sample_period_s = 1.0 / rate;
    trace.config = (p1 && p2) ? Configuration::PulsedPulsed : Configuration::CwPulsed;
    trace.samples_mv.resize(count);

    const bool both = p1 && p2;
    const bool jitter = options.pulse_width_jitter && both;
    const double nominal = effective_amplitude(ld1, ld2, model, options.arrival_offset_s);

    parallel_for(chunk_count(count), workers, [&](std::size_t c) {
        Rng rng(derive_seed(rng_seed, c));
        const std::size_t begin = c * kSimulationChunk;
        const std::size_t end = std::min(count, begin + kSimulationChunk);
        for (std::size_t i = begin; i < end; ++i) {
            double amp = nominal;
            if (jitter) {
                // Widths are floored at 1% of nominal so the overlap law stays defined.
                const double w1 = std::max(0.01 * ld1.pulse_width_3db_ps,
                                           rng.normal(ld1.pulse_width_3db_ps,
                                                      ld1.pulse_width_jitter_sd_ps));
                const double w2 = std::max(0.01 * ld2.pulse_width_3db_ps,
                                           rng.normal(ld2.pulse_width_3db_ps,
                                                      ld2.pulse_width_jitter_sd_ps));
                amp = model.amplitude_mv *
                      pulse_overlap(options.arrival_offset_s, w1 * 1e-12, w2 * 1e-12);
            }
            trace.samples_mv[i] = amp * std::cos(rng.uniform_phase()) + model.center_mv;
        }
    });
    return trace;
}

QuantumSignalModel fit_arcsine_model(const AnalogTrace& trace) {
    trace.validate();
    if (trace.samples_mv.size() < 1000) {
        throw InsufficientData("amplitude fit needs at least 1000 samples");
    }
    std::vector<double> v = trace.samples_mv;
    auto quantile = [&](double p) {
        const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(v.size() - 1)));
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
        return v[k];
    };
    const double lo = quantile(0.001);
    const double hi = quantile(0.999);
    if (!(hi > lo)) throw DegenerateInput("trace has no spread to fit an amplitude");
    QuantumSignalModel model;
    model.center_mv = 0.5 * (lo + hi);
    model.amplitude_mv = 0.5 * (hi - lo) / std::sin(std::numbers::pi * 0.499);
    return model;
}

}  // namespace qrng
