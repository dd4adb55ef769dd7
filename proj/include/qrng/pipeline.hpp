#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "qrng/config.hpp"

namespace qrng {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitCertification = 2,
    kExitTestFailure = 3,
    kExitIo = 4,
};

// File names inside the output directory.
inline constexpr const char* kTraceFile = "trace.bin";
inline constexpr const char* kCodesFile = "codes.bin";
inline constexpr const char* kHistogramCsv = "code_histogram.csv";
inline constexpr const char* kCertificationFile = "certification.json";
inline constexpr const char* kSensitivityCsv = "sensitivity.csv";
inline constexpr const char* kSeedFile = "toeplitz_seed.bin";
inline constexpr const char* kBitsFile = "bits.bin";
inline constexpr const char* kExtractionFile = "extraction.json";
inline constexpr const char* kTestsFile = "tests.json";
inline constexpr const char* kPvalueCsv = "test_pvalues.csv";
inline constexpr const char* kAutocorrCsv = "autocorr.csv";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kTimingsFile = "timings.json";

enum class InputFormat { Csv, Binary, RawU8 };
InputFormat parse_input_format(std::string_view text);

struct IngestOptions {
    InputFormat format = InputFormat::Binary;
    std::filesystem::path input;
    std::filesystem::path sidecar;  // raw_u8: defaults to <input>.json
    bool has_header = true;
    bool resample = false;
    std::optional<double> sample_period_s;
};

/// Runs pipeline stages against one output directory. Every stage output is a pure
/// function of the config, the seed and the stage inputs; the worker count only
/// changes timings.
class Pipeline {
public:
    Pipeline(PipelineConfig config, std::filesystem::path out_dir, unsigned workers,
             bool force, std::ostream& log);

    int simulate();
    int ingest(const IngestOptions& options);
    int quantize();
    int certify();
    int extract();
    int test(const std::filesystem::path& bits_path = {});
    /// Runs the suite on a code file, each code contributing adc.bits bits MSB-first.
    int test_codes(const std::filesystem::path& codes_path);
    /// simulate (or ingest source.input_trace), quantize, certify, extract, test.
    int run();

    const std::filesystem::path& out_dir() const { return out_; }

private:
    std::filesystem::path path(const char* name) const { return out_ / name; }
    int run_suite(std::span<const std::uint8_t> bytes, std::size_t bits,
                  const std::filesystem::path& input);
    void begin_manifest();
    void record_stage(const std::string& stage, nlohmann::json entry, double seconds);
    nlohmann::json load_json(const std::filesystem::path& p) const;
    void save_json(const std::filesystem::path& p, const nlohmann::json& j) const;

    PipelineConfig config_;
    std::filesystem::path out_;
    unsigned workers_;
    bool force_;
    std::ostream& log_;
};

/// Maps library exceptions to CLI exit codes and prints a diagnostic.
int report_error(const std::exception& e, std::ostream& err);

}  // namespace qrng
