#include "qrng/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qrng/errors.hpp"
#include "qrng/parallel.hpp"

namespace qrng {

void CertificationInput::validate() const {
    model.validate();
    adc.validate();
    bounds.validate();
}

double conditional_code_probability(const CertificationInput& input, std::uint32_t code,
                                    double noise_mv) {
    if (!input.bounds.contains(noise_mv)) {
        throw InvalidParameter("noise value lies outside the noise bounds");
    }
    const BinEdges e = code_bin_edges(input.adc, code);
    return quantum_mass(e.lower_mv - noise_mv, e.upper_mv - noise_mv, input.model);
}

std::vector<double> conditional_code_distribution(const CertificationInput& input,
                                                  double noise_mv) {
    std::vector<double> p(input.adc.code_count());
    for (std::uint32_t c = 0; c < p.size(); ++c) {
        p[c] = conditional_code_probability(input, c, noise_mv);
    }
    return p;
}

std::vector<double> noise_candidates(const CertificationInput& input, int grid_divisions) {
    if (grid_divisions < 1) throw InvalidParameter("grid_divisions must be positive");
    const double lo = input.bounds.n_min_mv;
    const double hi = input.bounds.n_max_mv;
    std::vector<double> out{lo, hi};

    // Between alignment events each code's mass is monotone in n, so extrema sit at
    // an alignment of a support endpoint with a bin edge, or at a bound.
    const double delta = input.adc.step_mv();
    const double endpoints[] = {input.model.lower_mv(), input.model.upper_mv()};
    for (std::uint32_t i = 0; i <= input.adc.code_count(); ++i) {
        const double edge = input.adc.lower_mv() + static_cast<double>(i) * delta;
        for (double endpoint : endpoints) {
            const double n = edge - endpoint;
            if (n >= lo && n <= hi) out.push_back(n);
        }
    }
    if (hi > lo) {
        const double step = delta / grid_divisions;
        const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / step));
        for (std::size_t s = 1; s <= steps; ++s) {
            const double n = lo + static_cast<double>(s) * step;
            if (n < hi) out.push_back(n);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string_view to_string(WorstRegime regime) {
    return regime == WorstRegime::InteriorBin ? "interior-bin" : "clipped-end-code";
}

CertificationReport worst_case_min_entropy(const CertificationInput& input, int grid_divisions,
                                           unsigned workers) {
    input.validate();
    const auto& m = input.model;
    const auto& adc = input.adc;
    if (m.upper_mv() + input.bounds.n_max_mv <= adc.lower_mv() ||
        m.lower_mv() + input.bounds.n_min_mv >= adc.upper_mv()) {
        throw DegenerateInput("quantum support [" + std::to_string(m.lower_mv()) + ", " +
                              std::to_string(m.upper_mv()) + "] mV never reaches the ADC range [" +
                              std::to_string(adc.lower_mv()) + ", " +
                              std::to_string(adc.upper_mv()) + "] mV");
    }

    const auto candidates = noise_candidates(input, grid_divisions);

    struct Best {
        double p = -1.0;
        double noise = 0.0;
        std::uint32_t code = 0;
    };
    // Fixed partition into slices, reduced in slice order, so the result does not
    // depend on the worker count.
    constexpr std::size_t kSlice = 64;
    const std::size_t slices = (candidates.size() + kSlice - 1) / kSlice;
    std::vector<Best> best(slices);
    parallel_for(slices, workers, [&](std::size_t s) {
        Best b;
        const std::size_t end = std::min(candidates.size(), (s + 1) * kSlice);
        for (std::size_t i = s * kSlice; i < end; ++i) {
            const double n = candidates[i];
            for (std::uint32_t c = 0; c < adc.code_count(); ++c) {
                const double p = conditional_code_probability(input, c, n);
                if (p > b.p) b = Best{p, n, c};
            }
        }
        best[s] = b;
    });
    Best overall;
    for (const auto& b : best) {
        if (b.p > overall.p) overall = b;
    }

    CertificationReport r;
    r.input = input;
    r.noise_candidates = candidates.size();
    r.worst_probability = overall.p;
    r.worst_noise_mv = overall.noise;
    r.worst_code = overall.code;
    r.h_min_bits = -std::log2(overall.p);
    r.regime = (overall.code == 0 || overall.code == adc.max_code()) &&
                       (m.lower_mv() + overall.noise < adc.lower_mv() ||
                        m.upper_mv() + overall.noise > adc.upper_mv())
                   ? WorstRegime::ClippedEndCode
                   : WorstRegime::InteriorBin;
    r.code_probabilities = conditional_code_distribution(input, overall.noise);
    r.assumptions = {
        "quantum law: " + std::string(to_string(m.law)) + " with amplitude " +
            std::to_string(m.amplitude_mv) + " mV centered at " + std::to_string(m.center_mv) +
            " mV",
        "classical noise is fully known to the adversary and ranges over [n_min, n_max]",
        "noise confidence " + std::to_string(input.bounds.confidence) +
            " per-tail symmetric quantiles",
        "interferometer phase drift excluded from the noise bounds",
        "end codes own the clipped half-lines below V_l and at or above V_u",
        "noise scan: bounds, endpoint/bin-edge alignments and a uniform grid of step delta/" +
            std::to_string(grid_divisions),
    };
    return r;
}

ExtractionRatioCheck verify_extraction_ratio(double h_min_bits, std::uint32_t n_bits,
                                             std::uint32_t m_bits, int adc_bits,
                                             int security_exponent) {
    if (adc_bits <= 0 || n_bits % static_cast<std::uint32_t>(adc_bits) != 0) {
        throw InvalidParameter("n must be divisible by the adc bit width");
    }
    if (m_bits > n_bits) throw InvalidParameter("m must not exceed n");
    ExtractionRatioCheck r;
    const double samples = static_cast<double>(n_bits / static_cast<std::uint32_t>(adc_bits));
    r.available_bits = samples * h_min_bits - 2.0 * security_exponent;
    r.slack_bits = r.available_bits - static_cast<double>(m_bits);
    r.ok = r.slack_bits >= 0.0;
    return r;
}

double empirical_min_entropy(const QuantizedTrace& trace) {
    if (trace.codes.empty()) throw InvalidParameter("trace has no codes");
    std::vector<std::size_t> counts(trace.adc.code_count(), 0);
    for (auto c : trace.codes) ++counts.at(c);
    const auto peak = *std::max_element(counts.begin(), counts.end());
    return -std::log2(static_cast<double>(peak) / static_cast<double>(trace.codes.size()));
}

AdcConfig noise_margin_adc(const QuantumSignalModel& model, const NoiseBounds& bounds, int bits) {
    const double margin = std::max(-bounds.n_min_mv, bounds.n_max_mv);
    AdcConfig adc;
    adc.bits = bits;
    adc.offset_mv = model.center_mv;
    adc.span_mv = 2.0 * (model.amplitude_mv + margin);
    return adc;
}

std::vector<SensitivityRow> certify_presets(
    const QuantumSignalModel& model, const NoiseBounds& bounds,
    const std::vector<std::pair<std::string, AdcConfig>>& presets, unsigned workers) {
    std::vector<SensitivityRow> rows;
    for (const auto& [name, adc] : presets) {
        const auto report = worst_case_min_entropy({model, adc, bounds}, 100, workers);
        rows.push_back({name, adc, report.h_min_bits, report.regime});
    }
    return rows;
}

}  // namespace qrng
