#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qrng/digitizer.hpp"
#include "qrng/extractor.hpp"
#include "qrng/noise_model.hpp"
#include "qrng/source_model.hpp"

namespace qrng {

/// Everything one pipeline run needs. Loaded from a key = value file with optional
/// [section] headers; keys carry their units (linewidth_3db_nm, sample_period_s, ...).
struct PipelineConfig {
    std::string name = "custom";
    Configuration configuration = Configuration::CwCw;
    LaserSpec ld1;
    LaserSpec ld2;
    BeatSpec beat;
    QuantumSignalModel model;
    double sample_period_s = 0.0;  // CW+CW only; pulsed configs sample once per pulse
    double arrival_offset_s = 0.0;
    bool pulse_width_jitter = false;
    std::size_t sample_count = 0;
    std::filesystem::path input_trace;  // ingest this file instead of simulating

    AdcConfig adc;
    std::vector<std::pair<std::string, double>> alternate_spans_mv;  // sensitivity presets

    std::optional<NoiseBounds> bounds;
    std::vector<std::filesystem::path> noise_channel_files;
    double noise_confidence = 0.999999;

    std::uint32_t extractor_n = 4096;
    std::uint32_t extractor_m = 2048;
    int security_exponent = 100;
    std::filesystem::path seed_file;
    Kernel kernel = Kernel::Auto;

    double alpha = 0.01;
    int max_lag = 100;
    std::size_t block_len = 128;

    std::uint64_t rng_seed = 0;
    std::filesystem::path output_dir = "out";

    /// Period between consecutive samples: sample_period_s for CW+CW, else the pulse period.
    double sampling_period_s() const;

    /// Cross-field checks. Throws ConfigurationError naming the first offending field.
    void validate() const;
};

/// Parses config text. Relative paths are resolved against `base_dir`.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Snapshot for manifests. Leaves out where outputs go so reruns elsewhere compare equal.
nlohmann::json config_snapshot(const PipelineConfig& config);

}  // namespace qrng
