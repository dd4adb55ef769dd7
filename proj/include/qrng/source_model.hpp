#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qrng {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kDefaultWavelengthNm = 1562.4;
inline constexpr double kFwhmToSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

enum class LaserMode { ContinuousWave, Pulsed };

enum class Configuration { CwCw, CwPulsed, PulsedPulsed };

/// What a trace records: the interference signal, or one classical noise channel
/// measured with one or both lasers switched off.
enum class TraceChannel { QuantumSignal, Electrical, IntensityLD1, IntensityLD2 };

enum class QuantumLaw { Arcsine, Uniform };

std::string_view to_string(LaserMode mode);
std::string_view to_string(Configuration config);
std::string_view to_string(TraceChannel channel);
std::string_view to_string(QuantumLaw law);
LaserMode parse_laser_mode(std::string_view text);
Configuration parse_configuration(std::string_view text);
TraceChannel parse_trace_channel(std::string_view text);
QuantumLaw parse_quantum_law(std::string_view text);

struct LaserSpec {
    double center_wavelength_nm = kDefaultWavelengthNm;
    double linewidth_3db_nm = 0.0;
    LaserMode mode = LaserMode::ContinuousWave;
    double repetition_rate_hz = 0.0;      // pulsed only
    double pulse_width_3db_ps = 0.0;      // pulsed only
    double pulse_width_jitter_sd_ps = 0.0;
    double relative_amplitude = 1.0;

    /// Throws InvalidParameter naming the offending field.
    void validate() const;
};

/// Beat frequency of the two lasers, drawn once per capture.
struct BeatSpec {
    double mean_hz = 0.0;
    double sd_hz = 0.0;
};

/// Law of the quantum voltage: A cos(phi) + center with phi uniform gives the arcsine law.
/// The uniform law on the same support is kept for calibration and sanity checks.
struct QuantumSignalModel {
    double amplitude_mv = 0.0;
    double center_mv = 0.0;
    QuantumLaw law = QuantumLaw::Arcsine;

    double lower_mv() const { return center_mv - amplitude_mv; }
    double upper_mv() const { return center_mv + amplitude_mv; }
    void validate() const;
};

struct AnalogTrace {
    double sample_period_s = 0.0;
    std::vector<double> samples_mv;
    Configuration config = Configuration::CwCw;
    TraceChannel channel = TraceChannel::QuantumSignal;

    void validate() const;
};

// Coherence time tau_c = lambda^2 / (c * d_lambda), in picoseconds.
double coherence_time_ps(const LaserSpec& laser);

/// Variance of the phase-difference increment over one sampling period:
/// 2 T_s (1/tau1 + 1/tau2). All durations in the same unit.
double phase_variance(double sample_period, double tau1, double tau2);

/// Smallest sampling period whose phase-increment variance reaches 1 rad^2.
double min_sampling_period(double tau1, double tau2);

/// Arcsine density on the open support; +infinity exactly at the endpoints, 0 outside.
double arcsine_pdf(double q_mv, const QuantumSignalModel& model);
double arcsine_cdf(double q_mv, const QuantumSignalModel& model);

/// Density and distribution function of whichever law the model selects.
double quantum_pdf(double q_mv, const QuantumSignalModel& model);
double quantum_cdf(double q_mv, const QuantumSignalModel& model);

/// Probability mass of the quantum law on [lo, hi] (either bound may be infinite).
double quantum_mass(double lo_mv, double hi_mv, const QuantumSignalModel& model);

/// Quantile function of the arcsine law.
double arcsine_quantile(double p, const QuantumSignalModel& model);

/// Normalized overlap of two Gaussian pulse envelopes offset by `offset_s`:
/// exp(-dt^2 / (4 sbar^2)), sbar^2 the mean of the two envelope variances.
double pulse_overlap(double offset_s, double fwhm1_s, double fwhm2_s);

/// Samples per independently seeded shard; shard i draws from derive_seed(rng_seed, i).
inline constexpr std::size_t kSimulationChunk = 1u << 16;

/// Beat-note trace of two CW lasers: V_i = A cos(w t_i + dtheta_i) + center, with
/// w drawn once per trace and dtheta a Wiener process.
AnalogTrace simulate_cw_cw(const LaserSpec& ld1, const LaserSpec& ld2, const BeatSpec& beat,
                           const QuantumSignalModel& model, double sample_period_s,
                           std::size_t count, std::uint64_t rng_seed, unsigned workers = 1);

struct PulsedOptions {
    double arrival_offset_s = 0.0;
    bool pulse_width_jitter = false;
};

/// One sample per pulse slot with a fresh uniform phase per pulse.
AnalogTrace simulate_pulsed(const LaserSpec& ld1, const LaserSpec& ld2,
                            const QuantumSignalModel& model, const PulsedOptions& options,
                            std::size_t count, std::uint64_t rng_seed, unsigned workers = 1);

/// Effective amplitude the pulsed simulator uses for a nominal model (no jitter).
double effective_amplitude(const LaserSpec& ld1, const LaserSpec& ld2,
                           const QuantumSignalModel& model, double arrival_offset_s);

/// Estimates A and center from a trace by matching the 0.1% / 99.9% arcsine quantiles.
QuantumSignalModel fit_arcsine_model(const AnalogTrace& trace);

}  // namespace qrng
