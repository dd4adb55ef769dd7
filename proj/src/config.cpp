#include "qrng/config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "qrng/errors.hpp"
#include "qrng/json_io.hpp"

namespace qrng {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::string unquote(const std::string& v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
        throw ConfigurationError(key, "expected a number, got '" + v + "'");
    }
    return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789_") != std::string::npos) {
        // Allow integral values written in exponent form, e.g. 4e6.
        const double d = to_double(key, v);
        if (d < 0 || d != std::floor(d) || d > 1.8e19) {
            throw ConfigurationError(key, "expected a nonnegative integer, got '" + v + "'");
        }
        return static_cast<std::uint64_t>(d);
    }
    std::string digits;
    for (char c : v) {
        if (c != '_') digits += c;
    }
    try {
        return std::stoull(digits);
    } catch (const std::exception&) {
        throw ConfigurationError(key, "integer out of range: '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigurationError(key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::string body = trim(v);
    if (body.size() >= 2 && body.front() == '[' && body.back() == ']') {
        body = body.substr(1, body.size() - 2);
    }
    std::vector<std::string> items;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = unquote(trim(item));
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

template <class F>
auto parse_enum(const std::string& key, F parse, const std::string& v) {
    try {
        return parse(v);
    } catch (const Error& e) {
        throw ConfigurationError(key, e.what());
    }
}

Kernel parse_kernel(const std::string& key, const std::string& v) {
    for (Kernel k : {Kernel::Naive, Kernel::WordParallel, Kernel::Clmul, Kernel::Vpclmul,
                     Kernel::Auto}) {
        if (v == to_string(k)) return k;
    }
    throw ConfigurationError(key, "unknown kernel '" + v + "'");
}

void check(bool ok, const char* field, const std::string& message) {
    if (!ok) throw ConfigurationError(field, message);
}

}  // namespace

double PipelineConfig::sampling_period_s() const {
    if (configuration == Configuration::CwCw) return sample_period_s;
    const LaserSpec& pulsed = configuration == Configuration::CwPulsed ? ld2 : ld1;
    return pulsed.repetition_rate_hz > 0 ? 1.0 / pulsed.repetition_rate_hz : 0.0;
}

void PipelineConfig::validate() const {
    const bool want_pulsed1 = configuration == Configuration::PulsedPulsed;
    const bool want_pulsed2 = configuration != Configuration::CwCw;
    check((ld1.mode == LaserMode::Pulsed) == want_pulsed1, "ld1.mode",
          std::string("must be ") + (want_pulsed1 ? "Pulsed" : "ContinuousWave") + " for " +
              std::string(to_string(configuration)));
    check((ld2.mode == LaserMode::Pulsed) == want_pulsed2, "ld2.mode",
          std::string("must be ") + (want_pulsed2 ? "Pulsed" : "ContinuousWave") + " for " +
              std::string(to_string(configuration)));
    const std::pair<const LaserSpec*, std::string> lasers[] = {{&ld1, "ld1"}, {&ld2, "ld2"}};
    for (const auto& [laser, prefix] : lasers) {
        if (laser->mode == LaserMode::Pulsed) {
            if (!(laser->repetition_rate_hz > 0)) {
                throw ConfigurationError(prefix + ".repetition_rate_hz",
                                         "pulsed lasers require a positive repetition rate");
            }
            if (!(laser->pulse_width_3db_ps > 0)) {
                throw ConfigurationError(prefix + ".pulse_width_3db_ps",
                                         "pulsed lasers require a positive pulse width");
            }
        }
        try {
            laser->validate();
        } catch (const ConfigurationError& e) {
            throw ConfigurationError(prefix + "." + e.field(), e.what());
        } catch (const InvalidParameter& e) {
            throw ConfigurationError(prefix, e.what());
        }
    }
    if (configuration == Configuration::PulsedPulsed) {
        check(ld1.repetition_rate_hz == ld2.repetition_rate_hz, "ld2.repetition_rate_hz",
              "both lasers must share one repetition rate");
    }
    if (configuration == Configuration::CwCw) {
        check(sample_period_s > 0, "source.sample_period_s",
              "CW+CW configurations require a positive sampling period");
        check(beat.sd_hz >= 0, "beat.sd_hz", "must be nonnegative");
    } else {
        check(sample_period_s == 0 || std::abs(sample_period_s * sampling_period_s() - 1.0) < 1e-9 ||
                  std::abs(sample_period_s - sampling_period_s()) < 1e-15,
              "source.sample_period_s", "pulsed configurations sample once per pulse");
    }
    check(model.amplitude_mv > 0, "source.amplitude_mv", "must be positive");
    check(std::isfinite(model.center_mv), "source.center_mv", "must be finite");
    check(sample_count > 0 || !input_trace.empty(), "source.sample_count", "must be positive");
    check(adc.bits >= 1 && adc.bits <= 16, "adc.bits", "must lie in 1..16");
    check(adc.span_mv > 0, "adc.span_mv", "must be positive");
    for (const auto& [label, span] : alternate_spans_mv) {
        check(span > 0, "adc.alternate_span_mv", "must be positive");
    }
    check(bounds.has_value() != !noise_channel_files.empty(), "noise",
          "give either n_min_mv/n_max_mv or channel_files, not both or neither");
    if (bounds) {
        check(bounds->n_min_mv <= 0, "noise.n_min_mv", "must be <= 0");
        check(bounds->n_max_mv >= 0, "noise.n_max_mv", "must be >= 0");
    }
    check(noise_confidence > 0 && noise_confidence < 1, "noise.confidence", "must lie in (0, 1)");
    check(extractor_n > 0, "extractor.n", "must be positive");
    check(extractor_n % static_cast<std::uint32_t>(adc.bits) == 0, "extractor.n",
          "must be divisible by adc.bits");
    check(extractor_m > 0 && extractor_m <= extractor_n, "extractor.m", "must lie in 1..n");
    check(security_exponent >= 0, "extractor.security_exponent", "must be nonnegative");
    check(alpha > 0 && alpha < 1, "tests.alpha", "must lie in (0, 1)");
    check(max_lag >= 1, "tests.max_lag", "must be at least 1");
    check(block_len >= 1, "tests.block_len", "must be at least 1");
}

PipelineConfig parse_config(const std::string& text, const fs::path& base_dir) {
    PipelineConfig c;
    std::optional<double> n_min, n_max;
    std::set<std::string> seen;
    auto path_of = [&](const std::string& v) {
        fs::path p(v);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };

    using Setter = std::function<void(const std::string& key, const std::string& v)>;
    auto laser_setters = [&](LaserSpec& l, const std::string& prefix,
                             std::map<std::string, Setter>& table) {
        table[prefix + "center_wavelength_nm"] = [&l](auto& k, auto& v) { l.center_wavelength_nm = to_double(k, v); };
        table[prefix + "linewidth_3db_nm"] = [&l](auto& k, auto& v) { l.linewidth_3db_nm = to_double(k, v); };
        table[prefix + "mode"] = [&l](auto& k, auto& v) { l.mode = parse_enum(k, parse_laser_mode, v); };
        table[prefix + "repetition_rate_hz"] = [&l](auto& k, auto& v) { l.repetition_rate_hz = to_double(k, v); };
        table[prefix + "pulse_width_3db_ps"] = [&l](auto& k, auto& v) { l.pulse_width_3db_ps = to_double(k, v); };
        table[prefix + "pulse_width_jitter_sd_ps"] = [&l](auto& k, auto& v) { l.pulse_width_jitter_sd_ps = to_double(k, v); };
        table[prefix + "relative_amplitude"] = [&l](auto& k, auto& v) { l.relative_amplitude = to_double(k, v); };
    };

    std::map<std::string, Setter> table;
    table["name"] = [&](auto&, auto& v) { c.name = v; };
    table["configuration"] = [&](auto& k, auto& v) { c.configuration = parse_enum(k, parse_configuration, v); };
    laser_setters(c.ld1, "ld1.", table);
    laser_setters(c.ld2, "ld2.", table);
    table["beat.mean_hz"] = [&](auto& k, auto& v) { c.beat.mean_hz = to_double(k, v); };
    table["beat.sd_hz"] = [&](auto& k, auto& v) { c.beat.sd_hz = to_double(k, v); };
    table["source.amplitude_mv"] = [&](auto& k, auto& v) { c.model.amplitude_mv = to_double(k, v); };
    table["source.center_mv"] = [&](auto& k, auto& v) { c.model.center_mv = to_double(k, v); };
    table["source.law"] = [&](auto& k, auto& v) { c.model.law = parse_enum(k, parse_quantum_law, v); };
    table["source.sample_period_s"] = [&](auto& k, auto& v) { c.sample_period_s = to_double(k, v); };
    table["source.arrival_offset_s"] = [&](auto& k, auto& v) { c.arrival_offset_s = to_double(k, v); };
    table["source.pulse_width_jitter"] = [&](auto& k, auto& v) { c.pulse_width_jitter = to_bool(k, v); };
    table["source.sample_count"] = [&](auto& k, auto& v) { c.sample_count = to_u64(k, v); };
    table["source.input_trace"] = [&](auto&, auto& v) { c.input_trace = path_of(v); };
    table["adc.bits"] = [&](auto& k, auto& v) { c.adc.bits = static_cast<int>(to_u64(k, v)); };
    table["adc.offset_mv"] = [&](auto& k, auto& v) { c.adc.offset_mv = to_double(k, v); };
    table["adc.span_mv"] = [&](auto& k, auto& v) { c.adc.span_mv = to_double(k, v); };
    table["adc.alternate_span_mv"] = [&](auto& k, auto& v) {
        for (const auto& item : split_list(v)) {
            c.alternate_spans_mv.emplace_back("span_" + item + "_mv", to_double(k, item));
        }
    };
    table["noise.n_min_mv"] = [&](auto& k, auto& v) { n_min = to_double(k, v); };
    table["noise.n_max_mv"] = [&](auto& k, auto& v) { n_max = to_double(k, v); };
    table["noise.confidence"] = [&](auto& k, auto& v) { c.noise_confidence = to_double(k, v); };
    table["noise.channel_files"] = [&](auto&, auto& v) {
        for (const auto& item : split_list(v)) c.noise_channel_files.push_back(path_of(item));
    };
    table["extractor.n"] = [&](auto& k, auto& v) { c.extractor_n = static_cast<std::uint32_t>(to_u64(k, v)); };
    table["extractor.m"] = [&](auto& k, auto& v) { c.extractor_m = static_cast<std::uint32_t>(to_u64(k, v)); };
    table["extractor.security_exponent"] = [&](auto& k, auto& v) { c.security_exponent = static_cast<int>(to_u64(k, v)); };
    table["extractor.seed_file"] = [&](auto&, auto& v) { c.seed_file = path_of(v); };
    table["extractor.kernel"] = [&](auto& k, auto& v) { c.kernel = parse_kernel(k, v); };
    table["tests.alpha"] = [&](auto& k, auto& v) { c.alpha = to_double(k, v); };
    table["tests.max_lag"] = [&](auto& k, auto& v) { c.max_lag = static_cast<int>(to_u64(k, v)); };
    table["tests.block_len"] = [&](auto& k, auto& v) { c.block_len = to_u64(k, v); };
    table["run.rng_seed"] = [&](auto& k, auto& v) { c.rng_seed = to_u64(k, v); };
    table["run.output_dir"] = [&](auto&, auto& v) { c.output_dir = path_of(v); };

    std::stringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigurationError("line " + std::to_string(line_no), "expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        const std::string value = unquote(trim(line.substr(eq + 1)));
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigurationError(key, "unknown key");
        if (!seen.insert(key).second) throw ConfigurationError(key, "duplicate key");
        it->second(key, value);
    }
    if (n_min || n_max) {
        if (!n_min) throw ConfigurationError("noise.n_min_mv", "missing (n_max_mv given)");
        if (!n_max) throw ConfigurationError("noise.n_max_mv", "missing (n_min_mv given)");
        c.bounds = NoiseBounds{*n_min, *n_max, c.noise_confidence};
    }
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.parent_path());
}

nlohmann::json config_snapshot(const PipelineConfig& c) {
    using nlohmann::json;
    auto laser = [](const LaserSpec& l) {
        return json{{"center_wavelength_nm", l.center_wavelength_nm},
                    {"linewidth_3db_nm", l.linewidth_3db_nm},
                    {"mode", std::string(to_string(l.mode))},
                    {"repetition_rate_hz", l.repetition_rate_hz},
                    {"pulse_width_3db_ps", l.pulse_width_3db_ps},
                    {"pulse_width_jitter_sd_ps", l.pulse_width_jitter_sd_ps},
                    {"relative_amplitude", l.relative_amplitude}};
    };
    json alt = json::array();
    for (const auto& [label, span] : c.alternate_spans_mv) alt.push_back({{label, span}});
    json files = json::array();
    for (const auto& f : c.noise_channel_files) files.push_back(f.filename().string());
    json j = {
        {"name", c.name},
        {"configuration", std::string(to_string(c.configuration))},
        {"ld1", laser(c.ld1)},
        {"ld2", laser(c.ld2)},
        {"beat", {{"mean_hz", c.beat.mean_hz}, {"sd_hz", c.beat.sd_hz}}},
        {"source",
         {{"model", c.model},
          {"sample_period_s", c.sampling_period_s()},
          {"arrival_offset_s", c.arrival_offset_s},
          {"pulse_width_jitter", c.pulse_width_jitter},
          {"sample_count", c.sample_count},
          {"input_trace", c.input_trace.filename().string()}}},
        {"adc", c.adc},
        {"adc_alternate_spans", alt},
        {"noise",
         {{"bounds", c.bounds ? json(*c.bounds) : json(nullptr)},
          {"channel_files", files},
          {"confidence", c.noise_confidence}}},
        {"extractor",
         {{"n", c.extractor_n},
          {"m", c.extractor_m},
          {"security_exponent", c.security_exponent},
          {"seed_file", c.seed_file.filename().string()}}},
        {"tests", {{"alpha", c.alpha}, {"max_lag", c.max_lag}, {"block_len", c.block_len}}},
        {"rng_seed", c.rng_seed},
    };
    return j;
}

}  // namespace qrng
