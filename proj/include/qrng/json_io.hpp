#pragma once

#include "json.hpp"
#include "qrng/digitizer.hpp"
#include "qrng/entropy.hpp"
#include "qrng/extractor.hpp"
#include "qrng/noise_model.hpp"
#include "qrng/stat_tests.hpp"

namespace qrng {

void to_json(nlohmann::json& j, const AdcConfig& adc);
void from_json(const nlohmann::json& j, AdcConfig& adc);
void to_json(nlohmann::json& j, const NoiseBounds& bounds);
void from_json(const nlohmann::json& j, NoiseBounds& bounds);
void to_json(nlohmann::json& j, const QuantumSignalModel& model);
void from_json(const nlohmann::json& j, QuantumSignalModel& model);
void to_json(nlohmann::json& j, const CertificationReport& report);
void to_json(nlohmann::json& j, const ExtractionRatioCheck& check);
void to_json(nlohmann::json& j, const SensitivityRow& row);
void to_json(nlohmann::json& j, const TestSuiteResult& result);
void to_json(nlohmann::json& j, const ThroughputReport& report);

}  // namespace qrng
