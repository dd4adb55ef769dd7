#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qrng/source_model.hpp"

namespace qrng {

/// k-bit ADC centered on `offset_mv` covering `span_mv`. Bins are half-open
/// [lower, upper); the end codes also own the clipped half-lines.
struct AdcConfig {
    int bits = 8;
    double offset_mv = 0.0;
    double span_mv = 0.0;

    double lower_mv() const { return offset_mv - 0.5 * span_mv; }
    double upper_mv() const { return offset_mv + 0.5 * span_mv; }
    double step_mv() const { return span_mv / static_cast<double>(code_count()); }
    std::uint32_t code_count() const { return 1u << bits; }
    std::uint32_t max_code() const { return code_count() - 1; }

    void validate() const;
    bool operator==(const AdcConfig&) const = default;
};

struct QuantizedTrace {
    AdcConfig adc;
    double sample_period_s = 0.0;
    std::vector<std::uint16_t> codes;
    std::size_t clipped_low = 0;
    std::size_t clipped_high = 0;

    void validate() const;
};

/// Code for one voltage: floor((V - V_l) / delta), clamped to [0, 2^k - 1].
std::uint16_t quantize_sample(double v_mv, const AdcConfig& adc);

/// Quantizes a trace and counts samples that fell outside [V_l, V_u).
QuantizedTrace quantize(const AnalogTrace& trace, const AdcConfig& adc, unsigned workers = 1);

/// [lower, upper) edges of a code's bin. The end codes extend to -inf / +inf.
struct BinEdges {
    double lower_mv;
    double upper_mv;
    double nominal_lower_mv;
    double nominal_upper_mv;
};
BinEdges code_bin_edges(const AdcConfig& adc, std::uint32_t code);

/// Center of a code's nominal bin.
double code_midpoint(const AdcConfig& adc, std::uint32_t code);

}  // namespace qrng
