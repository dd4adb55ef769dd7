#include "qrng/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qrng/errors.hpp"
#include "qrng/json_io.hpp"

namespace qrng {

namespace fs = std::filesystem;

namespace {

template <class T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <class T>
T get(std::istream& in, const fs::path& path) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof value);
    if (!in) throw IoError(path.string() + ": truncated trace file");
    return value;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const fs::path& path, std::size_t line) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
        throw IoError(path.string() + ":" + std::to_string(line) + ": malformed number '" + t +
                      "'");
    }
    return v;
}

}  // namespace

void write_trace_binary(const AnalogTrace& trace, const fs::path& path) {
    trace.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kTraceMagic, sizeof kTraceMagic);
    put<std::uint32_t>(out, kTraceVersion);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(trace.config));
    put<std::uint16_t>(out, static_cast<std::uint16_t>(trace.channel));
    put<double>(out, trace.sample_period_s);
    put<std::uint64_t>(out, trace.samples_mv.size());
    out.write(reinterpret_cast<const char*>(trace.samples_mv.data()),
              static_cast<std::streamsize>(trace.samples_mv.size() * sizeof(double)));
    if (!out) throw IoError("failed writing " + path.string());
}

AnalogTrace read_trace_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kTraceMagic, sizeof magic) != 0) {
        throw IoError(path.string() + ": not a binary analog trace");
    }
    const auto version = get<std::uint32_t>(in, path);
    if (version != kTraceVersion) {
        throw IoError(path.string() + ": unsupported trace version " + std::to_string(version));
    }
    const auto config = get<std::uint16_t>(in, path);
    const auto channel = get<std::uint16_t>(in, path);
    if (config > 2 || channel > 3) throw IoError(path.string() + ": bad trace labels");
    AnalogTrace trace;
    trace.config = static_cast<Configuration>(config);
    trace.channel = static_cast<TraceChannel>(channel);
    trace.sample_period_s = get<double>(in, path);
    const auto count = get<std::uint64_t>(in, path);
    const auto size = fs::file_size(path);
    if (size != 32 + count * sizeof(double)) {
        throw IoError(path.string() + ": header count disagrees with file size");
    }
    trace.samples_mv.resize(count);
    in.read(reinterpret_cast<char*>(trace.samples_mv.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw IoError(path.string() + ": truncated samples");
    trace.validate();
    return trace;
}

AnalogTrace read_trace_csv(const fs::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    AnalogTrace trace;
    trace.channel = options.channel;
    trace.config = options.config;

    std::vector<double> times;
    std::vector<std::size_t> line_of;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = !options.has_header;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const auto colon = t.find(':');
            if (colon == std::string::npos) continue;
            const std::string key = trim(t.substr(1, colon - 1));
            const std::string value = trim(t.substr(colon + 1));
            if (key == "channel") trace.channel = parse_trace_channel(value);
            if (key == "config") trace.config = parse_configuration(value);
            continue;
        }
        if (!header_seen) {
            if (t != "time_s,voltage_mv") {
                throw IoError(path.string() + ":" + std::to_string(line_no) +
                              ": expected header 'time_s,voltage_mv'");
            }
            header_seen = true;
            continue;
        }
        const auto comma = t.find(',');
        if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
            throw IoError(path.string() + ":" + std::to_string(line_no) +
                          ": expected two comma-separated columns");
        }
        times.push_back(parse_number(t.substr(0, comma), path, line_no));
        trace.samples_mv.push_back(parse_number(t.substr(comma + 1), path, line_no));
        line_of.push_back(line_no);
    }
    if (trace.samples_mv.empty()) throw IoError(path.string() + ": no data rows");

    const std::size_t n = times.size();
    if (n == 1) {
        if (!options.sample_period_s) {
            throw IoError(path.string() + ": single-row file needs an explicit sample period");
        }
        trace.sample_period_s = *options.sample_period_s;
        trace.validate();
        return trace;
    }
    const double period = (times.back() - times.front()) / static_cast<double>(n - 1);
    if (!(period > 0.0)) throw IoError(path.string() + ": timestamps must increase");
    std::vector<double> steps(n - 1);
    for (std::size_t i = 1; i < n; ++i) steps[i - 1] = times[i] - times[i - 1];
    std::nth_element(steps.begin(), steps.begin() + steps.size() / 2, steps.end());
    const double nominal = steps[steps.size() / 2];
    for (std::size_t i = 1; i < n; ++i) {
        const double step = times[i] - times[i - 1];
        const double slack = 1e-6 * nominal + 8.0 * std::nextafter(std::abs(times[i]), INFINITY) -
                             8.0 * std::abs(times[i]);
        if (!(step > 0.0)) {
            throw IoError(path.string() + ":" + std::to_string(line_of[i]) +
                          ": timestamp does not increase");
        }
        if (std::abs(step - nominal) > slack && !options.resample) {
            throw IoError(path.string() + ":" + std::to_string(line_of[i]) +
                          ": sample spacing " + std::to_string(step) +
                          " s deviates from the median spacing " + std::to_string(nominal) +
                          " s by more than 1 ppm (use --resample)");
        }
    }
    trace.sample_period_s = period;
    if (options.resample) {
        std::vector<double> uniform(n);
        std::size_t j = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = times.front() + static_cast<double>(i) * period;
            while (j + 2 < n && times[j + 1] < t) ++j;
            const double span = times[j + 1] - times[j];
            const double f = std::clamp((t - times[j]) / span, 0.0, 1.0);
            uniform[i] = trace.samples_mv[j] + f * (trace.samples_mv[j + 1] - trace.samples_mv[j]);
        }
        trace.samples_mv = std::move(uniform);
    }
    trace.validate();
    return trace;
}

void write_trace_csv(const AnalogTrace& trace, const fs::path& path) {
    trace.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    out << "# channel: " << to_string(trace.channel) << '\n';
    out << "# config: " << to_string(trace.config) << '\n';
    out << "time_s,voltage_mv\n";
    for (std::size_t i = 0; i < trace.samples_mv.size(); ++i) {
        out << static_cast<double>(i) * trace.sample_period_s << ',' << trace.samples_mv[i] << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

fs::path sidecar_path(const fs::path& codes_path) {
    fs::path p = codes_path;
    p += ".json";
    return p;
}

void write_codes(const QuantizedTrace& trace, const fs::path& path) {
    trace.adc.validate();
    std::vector<std::uint8_t> bytes;
    if (trace.adc.bits <= 8) {
        bytes.reserve(trace.codes.size());
        for (auto c : trace.codes) bytes.push_back(static_cast<std::uint8_t>(c));
    } else {
        bytes.reserve(2 * trace.codes.size());
        for (auto c : trace.codes) {
            bytes.push_back(static_cast<std::uint8_t>(c & 0xFF));
            bytes.push_back(static_cast<std::uint8_t>(c >> 8));
        }
    }
    write_file_bytes(path, bytes);
    nlohmann::json side = {
        {"format", "qrng-codes"},
        {"version", 1},
        {"adc", trace.adc},
        {"sample_period_s", trace.sample_period_s},
        {"count", trace.codes.size()},
        {"clipped_low", trace.clipped_low},
        {"clipped_high", trace.clipped_high},
    };
    write_text_file(sidecar_path(path), side.dump(2) + "\n");
}

QuantizedTrace read_codes(const fs::path& path) { return read_codes(path, sidecar_path(path)); }

QuantizedTrace read_codes(const fs::path& path, const fs::path& sidecar) {
    const auto side_bytes = read_file_bytes(sidecar);
    nlohmann::json side;
    try {
        side = nlohmann::json::parse(side_bytes.begin(), side_bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw IoError(sidecar.string() + ": " + e.what());
    }
    QuantizedTrace trace;
    try {
        trace.adc = side.at("adc").get<AdcConfig>();
        trace.sample_period_s = side.at("sample_period_s").get<double>();
        trace.clipped_low = side.value("clipped_low", std::size_t{0});
        trace.clipped_high = side.value("clipped_high", std::size_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw IoError(sidecar.string() + ": " + e.what());
    }
    const auto bytes = read_file_bytes(path);
    if (trace.adc.bits <= 8) {
        trace.codes.assign(bytes.begin(), bytes.end());
    } else {
        if (bytes.size() % 2 != 0) throw IoError(path.string() + ": odd byte count for 16-bit codes");
        trace.codes.resize(bytes.size() / 2);
        for (std::size_t i = 0; i < trace.codes.size(); ++i) {
            trace.codes[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
        }
    }
    if (side.contains("count") && side["count"].get<std::size_t>() != trace.codes.size()) {
        throw IoError(path.string() + ": sidecar count disagrees with file size");
    }
    try {
        trace.validate();
    } catch (const InvalidParameter& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return trace;
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

void write_file_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

void write_text_file(const fs::path& path, std::string_view text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace qrng
