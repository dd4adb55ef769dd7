#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string_view>

#include "qrng/digitizer.hpp"
#include "qrng/source_model.hpp"

namespace qrng {

// Binary trace layout, little endian:
//   0  char[8]  "QRNGATRC"
//   8  u32      format version (1)
//  12  u16      configuration label
//  14  u16      channel label
//  16  f64      sample period, seconds
//  24  u64      sample count
//  32  f64[]    samples, millivolts
inline constexpr char kTraceMagic[8] = {'Q', 'R', 'N', 'G', 'A', 'T', 'R', 'C'};
inline constexpr std::uint32_t kTraceVersion = 1;

void write_trace_binary(const AnalogTrace& trace, const std::filesystem::path& path);
AnalogTrace read_trace_binary(const std::filesystem::path& path);

struct CsvOptions {
    bool has_header = true;
    bool resample = false;
    std::optional<double> sample_period_s;  // required for single-row files
    TraceChannel channel = TraceChannel::QuantumSignal;
    Configuration config = Configuration::CwCw;
};

/// Oscilloscope-style CSV, header "time_s,voltage_mv". Optional leading "# channel: X" and
/// "# config: Y" lines override the options. Rows must be uniformly spaced within 1 ppm
/// unless `resample` is set, in which case they are linearly interpolated onto a uniform grid.
AnalogTrace read_trace_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void write_trace_csv(const AnalogTrace& trace, const std::filesystem::path& path);

/// Raw codes (one byte per code for k <= 8, little-endian u16 otherwise) plus a JSON
/// sidecar at `<path>.json` carrying the ADC config and sample period.
void write_codes(const QuantizedTrace& trace, const std::filesystem::path& path);
QuantizedTrace read_codes(const std::filesystem::path& path);
/// Reads raw codes using an explicit sidecar path.
QuantizedTrace read_codes(const std::filesystem::path& path,
                          const std::filesystem::path& sidecar);

std::filesystem::path sidecar_path(const std::filesystem::path& codes_path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace qrng
