#include "qrng/digitizer.hpp"

#include <cmath>
#include <limits>

#include "qrng/errors.hpp"
#include "qrng/parallel.hpp"

namespace qrng {

void AdcConfig::validate() const {
    if (bits < 1 || bits > 16) throw InvalidParameter("adc bits must lie in [1, 16]");
    if (!(span_mv > 0.0) || !std::isfinite(span_mv)) {
        throw InvalidParameter("adc span must be positive");
    }
    if (!std::isfinite(offset_mv)) throw InvalidParameter("adc offset must be finite");
}

void QuantizedTrace::validate() const {
    adc.validate();
    if (!(sample_period_s > 0.0)) throw InvalidParameter("sample period must be positive");
    for (auto c : codes) {
        if (c > adc.max_code()) throw InvalidParameter("code out of range for adc");
    }
}

std::uint16_t quantize_sample(double v_mv, const AdcConfig& adc) {
    if (v_mv >= adc.upper_mv()) return static_cast<std::uint16_t>(adc.max_code());
    if (v_mv < adc.lower_mv()) return 0;
    // Measured from the offset so that V = offset lands exactly on code 2^(k-1).
    const double half = static_cast<double>(adc.code_count() / 2);
    const double x = std::floor((v_mv - adc.offset_mv) / adc.step_mv() + half);
    if (x <= 0.0) return 0;
    if (x >= static_cast<double>(adc.max_code())) return static_cast<std::uint16_t>(adc.max_code());
    return static_cast<std::uint16_t>(x);
}

QuantizedTrace quantize(const AnalogTrace& trace, const AdcConfig& adc, unsigned workers) {
    adc.validate();
    trace.validate();
    QuantizedTrace out;
    out.adc = adc;
    out.sample_period_s = trace.sample_period_s;
    out.codes.resize(trace.samples_mv.size());

    constexpr std::size_t kShard = 1u << 18;
    const std::size_t n = trace.samples_mv.size();
    const std::size_t shards = (n + kShard - 1) / kShard;
    std::vector<std::size_t> low(shards, 0), high(shards, 0);
    const double lo = adc.lower_mv();
    const double hi = adc.upper_mv();
    parallel_for(shards, workers, [&](std::size_t s) {
        const std::size_t end = std::min(n, (s + 1) * kShard);
        for (std::size_t i = s * kShard; i < end; ++i) {
            const double v = trace.samples_mv[i];
            low[s] += v < lo;
            high[s] += v >= hi;
            out.codes[i] = quantize_sample(v, adc);
        }
    });
    for (std::size_t s = 0; s < shards; ++s) {
        out.clipped_low += low[s];
        out.clipped_high += high[s];
    }
    return out;
}

BinEdges code_bin_edges(const AdcConfig& adc, std::uint32_t code) {
    adc.validate();
    if (code > adc.max_code()) throw InvalidParameter("code out of range for adc");
    const double half = static_cast<double>(adc.code_count() / 2);
    BinEdges e;
    e.nominal_lower_mv = adc.offset_mv + (static_cast<double>(code) - half) * adc.step_mv();
    e.nominal_upper_mv = adc.offset_mv + (static_cast<double>(code) + 1.0 - half) * adc.step_mv();
    if (code == 0) e.nominal_lower_mv = adc.lower_mv();
    if (code == adc.max_code()) e.nominal_upper_mv = adc.upper_mv();
    constexpr double inf = std::numeric_limits<double>::infinity();
    e.lower_mv = code == 0 ? -inf : e.nominal_lower_mv;
    e.upper_mv = code == adc.max_code() ? inf : e.nominal_upper_mv;
    return e;
}

double code_midpoint(const AdcConfig& adc, std::uint32_t code) {
    const auto e = code_bin_edges(adc, code);
    return 0.5 * (e.nominal_lower_mv + e.nominal_upper_mv);
}

}  // namespace qrng
