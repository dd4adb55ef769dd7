#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrng/digitizer.hpp"
#include "qrng/noise_model.hpp"
#include "qrng/source_model.hpp"

namespace qrng {

struct CertificationInput {
    QuantumSignalModel model;
    AdcConfig adc;
    NoiseBounds bounds;

    void validate() const;
};

/// Which kind of code attained the worst case.
enum class WorstRegime { InteriorBin, ClippedEndCode };

struct CertificationReport {
    double h_min_bits = 0.0;
    double worst_noise_mv = 0.0;
    std::uint32_t worst_code = 0;
    double worst_probability = 1.0;
    WorstRegime regime = WorstRegime::InteriorBin;
    std::vector<double> code_probabilities;  // at worst_noise_mv
    std::size_t noise_candidates = 0;
    std::vector<std::string> assumptions;
    CertificationInput input;
};

/// Probability that the measured code is `code` given classical noise `noise_mv`:
/// F_Q(upper - n) - F_Q(lower - n), end codes including the clipped half-lines.
double conditional_code_probability(const CertificationInput& input, std::uint32_t code,
                                    double noise_mv);

/// Full conditional code distribution for one noise value.
std::vector<double> conditional_code_distribution(const CertificationInput& input,
                                                  double noise_mv);

/// Candidate noise values scanned by worst_case_min_entropy: both bounds, every value
/// that puts a support endpoint on a bin edge, and a uniform grid of step delta/grid_divisions.
std::vector<double> noise_candidates(const CertificationInput& input, int grid_divisions = 100);

/// Worst-case min-entropy of the ADC output conditioned on classical noise:
/// -log2 max_n max_i P(code i | n), n ranging over the noise bounds.
CertificationReport worst_case_min_entropy(const CertificationInput& input,
                                           int grid_divisions = 100, unsigned workers = 1);

struct ExtractionRatioCheck {
    bool ok = false;
    double available_bits = 0.0;  // (n / k) h_min - 2 s
    double slack_bits = 0.0;      // available - m
};

/// Leftover-hash sizing: m <= (n / adc_bits) h_min - 2 security_exponent.
ExtractionRatioCheck verify_extraction_ratio(double h_min_bits, std::uint32_t n_bits,
                                             std::uint32_t m_bits, int adc_bits,
                                             int security_exponent);

/// -log2 of the most frequent code. A sanity diagnostic only: it ignores noise conditioning.
double empirical_min_entropy(const QuantizedTrace& trace);

/// ADC grid that covers the quantum support widened by the worst-case noise on both sides,
/// so no reachable measurement is clipped.
AdcConfig noise_margin_adc(const QuantumSignalModel& model, const NoiseBounds& bounds, int bits);

struct SensitivityRow {
    std::string preset;
    AdcConfig adc;
    double h_min_bits = 0.0;
    WorstRegime regime = WorstRegime::InteriorBin;
};

/// Certifies the same source under several ADC grid presets.
std::vector<SensitivityRow> certify_presets(
    const QuantumSignalModel& model, const NoiseBounds& bounds,
    const std::vector<std::pair<std::string, AdcConfig>>& presets, unsigned workers = 1);

std::string_view to_string(WorstRegime regime);

}  // namespace qrng
