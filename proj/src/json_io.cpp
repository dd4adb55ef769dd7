#include "qrng/json_io.hpp"

namespace qrng {

using nlohmann::json;

void to_json(json& j, const AdcConfig& adc) {
    j = {{"bits", adc.bits}, {"offset_mv", adc.offset_mv}, {"span_mv", adc.span_mv}};
}

void from_json(const json& j, AdcConfig& adc) {
    j.at("bits").get_to(adc.bits);
    j.at("offset_mv").get_to(adc.offset_mv);
    j.at("span_mv").get_to(adc.span_mv);
}

void to_json(json& j, const NoiseBounds& b) {
    j = {{"n_min_mv", b.n_min_mv}, {"n_max_mv", b.n_max_mv}, {"confidence", b.confidence}};
}

void from_json(const json& j, NoiseBounds& b) {
    j.at("n_min_mv").get_to(b.n_min_mv);
    j.at("n_max_mv").get_to(b.n_max_mv);
    b.confidence = j.value("confidence", b.confidence);
}

void to_json(json& j, const QuantumSignalModel& m) {
    j = {{"amplitude_mv", m.amplitude_mv},
         {"center_mv", m.center_mv},
         {"law", std::string(to_string(m.law))}};
}

void from_json(const json& j, QuantumSignalModel& m) {
    j.at("amplitude_mv").get_to(m.amplitude_mv);
    j.at("center_mv").get_to(m.center_mv);
    m.law = parse_quantum_law(j.value("law", std::string("Arcsine")));
}

void to_json(json& j, const CertificationReport& r) {
    j = {{"h_min_bits", r.h_min_bits},
         {"worst_noise_mv", r.worst_noise_mv},
         {"worst_code", r.worst_code},
         {"worst_probability", r.worst_probability},
         {"regime", std::string(to_string(r.regime))},
         {"noise_candidates", r.noise_candidates},
         {"model", r.input.model},
         {"adc", r.input.adc},
         {"bounds", r.input.bounds},
         {"assumptions", r.assumptions},
         {"code_probabilities", r.code_probabilities}};
}

void to_json(json& j, const ExtractionRatioCheck& c) {
    j = {{"ok", c.ok}, {"available_bits", c.available_bits}, {"slack_bits", c.slack_bits}};
}

void to_json(json& j, const SensitivityRow& row) {
    j = {{"preset", row.preset},
         {"adc", row.adc},
         {"h_min_bits", row.h_min_bits},
         {"regime", std::string(to_string(row.regime))}};
}

void to_json(json& j, const TestSuiteResult& r) {
    json tests = json::array();
    for (const auto& t : r.tests) {
        tests.push_back({{"name", t.name},
                         {"statistic", t.statistic},
                         {"p_value", t.p_value},
                         {"applicable", t.applicable},
                         {"pass", t.pass},
                         {"note", t.note}});
    }
    double max_abs_r = 0.0;
    for (std::size_t i = 1; i < r.autocorr.coefficients.size(); ++i) {
        max_abs_r = std::max(max_abs_r, std::abs(r.autocorr.coefficients[i]));
    }
    j = {{"stream_length", r.stream_length},
         {"alpha", r.alpha},
         {"all_pass", r.all_pass()},
         {"failures", r.failures()},
         {"autocorrelation_max_abs", max_abs_r},
         {"autocorrelation_small_sample", r.autocorr.small_sample},
         {"tests", tests}};
}

void to_json(json& j, const ThroughputReport& r) {
    j = {{"n", r.n},
         {"m", r.m},
         {"payload_bytes", r.payload_bytes},
         {"workers", r.workers},
         {"runs", r.runs},
         {"kernel", std::string(to_string(r.kernel))},
         {"median_seconds", r.median_seconds},
         {"input_bits_per_second", r.input_bits_per_second},
         {"output_bits_per_second", r.output_bits_per_second},
         {"run_seconds", r.run_seconds}};
}

}  // namespace qrng
