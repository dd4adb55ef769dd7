#include "qrng/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qrng/checksum.hpp"
#include "qrng/entropy.hpp"
#include "qrng/errors.hpp"
#include "qrng/extractor.hpp"
#include "qrng/json_io.hpp"
#include "qrng/stat_tests.hpp"
#include "qrng/trace_io.hpp"

#ifndef QRNG_VERSION
#define QRNG_VERSION "0.0.0"
#endif

namespace qrng {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double ks_distance(std::vector<double> x, const QuantumSignalModel& model) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = quantum_cdf(x[i], model);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

/// The source law the certifier and the simulator agree on: pulsed interference
/// shrinks the amplitude by the pulse overlap.
QuantumSignalModel effective_model(const PipelineConfig& c) {
    QuantumSignalModel m = c.model;
    if (c.configuration != Configuration::CwCw) {
        m.amplitude_mv = effective_amplitude(c.ld1, c.ld2, c.model, c.arrival_offset_s);
    }
    return m;
}

NoiseBounds resolve_bounds(const PipelineConfig& c, std::string& source) {
    if (c.bounds) {
        source = "config";
        return *c.bounds;
    }
    source = "channel_files";
    std::vector<NoiseBounds> parts;
    for (const auto& file : c.noise_channel_files) {
        CsvOptions opts;
        opts.channel = TraceChannel::Electrical;
        AnalogTrace trace = read_trace_csv(file, opts);
        parts.push_back(estimate_bounds(
            NoiseChannel::empirical(trace.channel, std::move(trace.samples_mv)),
            c.noise_confidence));
    }
    return combine_bounds(parts);
}

ToeplitzSeed load_toeplitz_seed(const PipelineConfig& c, std::string& source) {
    const std::uint32_t n = c.extractor_n;
    const std::uint32_t m = c.extractor_m;
    if (!c.seed_file.empty()) {
        const auto bytes = read_file_bytes(c.seed_file);
        source = "file:" + c.seed_file.filename().string();
        try {
            ToeplitzSeed seed = ToeplitzSeed::deserialize(bytes);
            if (seed.n() == n && seed.m() == m) return seed;
        } catch (const Error&) {
            // Not a serialized seed; treat the file as raw seed bits.
        }
        if (bytes.size() < seed_bytes_required(n, m)) {
            throw ConfigurationError("extractor.seed_file",
                                     "needs at least " + std::to_string(seed_bytes_required(n, m)) +
                                         " bytes of seed material");
        }
        return derive_seed(bytes, n, m);
    }
    source = "expanded from rng_seed";
    return derive_seed(expand_seed_bytes(c.rng_seed, "toeplitz-seed", seed_bytes_required(n, m)),
                       n, m);
}

std::string histogram_csv(const QuantizedTrace& q, const QuantumSignalModel& model) {
    std::vector<std::size_t> counts(q.adc.code_count(), 0);
    for (auto c : q.codes) ++counts[c];
    const CertificationInput zero_noise{model, q.adc, NoiseBounds{0.0, 0.0, 1.0}};
    const auto expected = conditional_code_distribution(zero_noise, 0.0);
    std::ostringstream out;
    out.precision(10);
    out << "code,count,frequency,expected_zero_noise\n";
    const double total = static_cast<double>(std::max<std::size_t>(q.codes.size(), 1));
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out << i << ',' << counts[i] << ',' << static_cast<double>(counts[i]) / total << ','
            << expected[i] << '\n';
    }
    return out.str();
}

}  // namespace

InputFormat parse_input_format(std::string_view text) {
    if (text == "csv") return InputFormat::Csv;
    if (text == "binary") return InputFormat::Binary;
    if (text == "raw_u8") return InputFormat::RawU8;
    throw InvalidParameter("unknown input format '" + std::string(text) +
                           "' (expected csv, binary or raw_u8)");
}

Pipeline::Pipeline(PipelineConfig config, fs::path out_dir, unsigned workers, bool force,
                   std::ostream& log)
    : config_(std::move(config)),
      out_(std::move(out_dir)),
      workers_(std::max(1u, workers)),
      force_(force),
      log_(log) {
    fs::create_directories(out_);
}

json Pipeline::load_json(const fs::path& p) const {
    const auto bytes = read_file_bytes(p);
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw IoError(p.string() + ": " + e.what());
    }
}

void Pipeline::save_json(const fs::path& p, const json& j) const {
    write_text_file(p, j.dump(2) + "\n");
}

void Pipeline::begin_manifest() {
    save_json(path(kManifestFile), json{{"tool", "qrng"},
                                        {"version", QRNG_VERSION},
                                        {"config", config_snapshot(config_)},
                                        {"stages", json::object()},
                                        {"rates", json::object()},
                                        {"forced", false},
                                        {"warnings", json::array()}});
    save_json(path(kTimingsFile), json{{"workers", workers_},
                                       {"kernel", std::string(to_string(
                                                      config_.kernel == Kernel::Auto
                                                          ? best_kernel()
                                                          : config_.kernel))},
                                       {"stages", json::object()}});
}

void Pipeline::record_stage(const std::string& stage, json entry, double seconds) {
    if (!fs::exists(path(kManifestFile)) || !fs::exists(path(kTimingsFile))) begin_manifest();
    json manifest = load_json(path(kManifestFile));
    if (entry.contains("rates")) {
        manifest["rates"].update(entry["rates"]);
        entry.erase("rates");
    }
    if (entry.contains("warning")) {
        manifest["warnings"].push_back(entry["warning"]);
        manifest["forced"] = true;
        entry.erase("warning");
    }
    manifest["stages"][stage] = std::move(entry);
    save_json(path(kManifestFile), manifest);

    json timings = load_json(path(kTimingsFile));
    timings["stages"][stage] = seconds;
    save_json(path(kTimingsFile), timings);
}

int Pipeline::simulate() {
    config_.validate();
    const Stopwatch clock;
    begin_manifest();
    AnalogTrace trace;
    if (config_.configuration == Configuration::CwCw) {
        trace = simulate_cw_cw(config_.ld1, config_.ld2, config_.beat, config_.model,
                               config_.sample_period_s, config_.sample_count, config_.rng_seed,
                               workers_);
    } else {
        trace = simulate_pulsed(config_.ld1, config_.ld2, config_.model,
                                PulsedOptions{config_.arrival_offset_s, config_.pulse_width_jitter},
                                config_.sample_count, config_.rng_seed, workers_);
    }
    write_trace_binary(trace, path(kTraceFile));

    const auto [lo, hi] = std::minmax_element(trace.samples_mv.begin(), trace.samples_mv.end());
    const QuantumSignalModel model = effective_model(config_);
    const double ks = ks_distance(trace.samples_mv, model);
    log_ << "simulate: " << trace.samples_mv.size() << " samples, period "
         << trace.sample_period_s << " s, range [" << *lo << ", " << *hi
         << "] mV, KS distance to analytic law " << ks << '\n';
    record_stage("simulate",
                 json{{"outputs", {{kTraceFile, sha256_file(path(kTraceFile))}}},
                      {"summary",
                       {{"samples", trace.samples_mv.size()},
                        {"sample_period_s", trace.sample_period_s},
                        {"min_mv", *lo},
                        {"max_mv", *hi},
                        {"effective_amplitude_mv", model.amplitude_mv},
                        {"ks_distance_to_model", ks}}}},
                 clock.seconds());
    return kExitOk;
}

int Pipeline::ingest(const IngestOptions& options) {
    const Stopwatch clock;
    begin_manifest();
    json summary;
    json outputs;
    const std::string input_name = options.input.filename().string();
    const std::string input_sha = sha256_file(options.input);
    if (options.format == InputFormat::RawU8) {
        QuantizedTrace q = read_codes(options.input, options.sidecar.empty()
                                                         ? sidecar_path(options.input)
                                                         : options.sidecar);
        write_codes(q, path(kCodesFile));
        summary = {{"codes", q.codes.size()}, {"adc", q.adc}};
        outputs = {{kCodesFile, sha256_file(path(kCodesFile))}};
        log_ << "ingest: " << q.codes.size() << " codes\n";
    } else {
        AnalogTrace trace;
        if (options.format == InputFormat::Csv) {
            CsvOptions csv;
            csv.has_header = options.has_header;
            csv.resample = options.resample;
            csv.sample_period_s = options.sample_period_s;
            csv.config = config_.configuration;
            trace = read_trace_csv(options.input, csv);
        } else {
            trace = read_trace_binary(options.input);
        }
        write_trace_binary(trace, path(kTraceFile));
        summary = {{"samples", trace.samples_mv.size()},
                   {"sample_period_s", trace.sample_period_s},
                   {"channel", std::string(to_string(trace.channel))},
                   {"resampled", options.resample}};
        outputs = {{kTraceFile, sha256_file(path(kTraceFile))}};
        log_ << "ingest: " << trace.samples_mv.size() << " samples, period "
             << trace.sample_period_s << " s\n";
    }
    record_stage("ingest",
                 json{{"inputs", {{input_name, input_sha}}}, {"outputs", outputs},
                      {"summary", summary}},
                 clock.seconds());
    return kExitOk;
}

int Pipeline::quantize() {
    config_.validate();
    const Stopwatch clock;
    const AnalogTrace trace = read_trace_binary(path(kTraceFile));
    const QuantizedTrace q = qrng::quantize(trace, config_.adc, workers_);
    write_codes(q, path(kCodesFile));
    write_text_file(path(kHistogramCsv), histogram_csv(q, effective_model(config_)));
    const double h_emp = empirical_min_entropy(q);
    log_ << "quantize: " << q.codes.size() << " codes, clipped " << q.clipped_low << " low / "
         << q.clipped_high << " high, empirical min-entropy " << h_emp << " bits\n";
    record_stage("quantize",
                 json{{"inputs", {{kTraceFile, sha256_file(path(kTraceFile))}}},
                      {"outputs",
                       {{kCodesFile, sha256_file(path(kCodesFile))},
                        {sidecar_path(kCodesFile).string(),
                         sha256_file(sidecar_path(path(kCodesFile)))},
                        {kHistogramCsv, sha256_file(path(kHistogramCsv))}}},
                      {"summary",
                       {{"codes", q.codes.size()},
                        {"clipped_low", q.clipped_low},
                        {"clipped_high", q.clipped_high},
                        {"empirical_min_entropy_bits", h_emp}}}},
                 clock.seconds());
    return kExitOk;
}

int Pipeline::certify() {
    config_.validate();
    const Stopwatch clock;
    std::string bounds_source;
    const NoiseBounds bounds = resolve_bounds(config_, bounds_source);
    const QuantumSignalModel model = effective_model(config_);
    const CertificationInput input{model, config_.adc, bounds};

    CertificationReport report;
    try {
        report = worst_case_min_entropy(input, 100, workers_);
    } catch (const DegenerateInput& e) {
        log_ << "certify: degenerate geometry: " << e.what() << '\n';
        throw;
    }
    const ExtractionRatioCheck ratio =
        verify_extraction_ratio(report.h_min_bits, config_.extractor_n, config_.extractor_m,
                                config_.adc.bits, config_.security_exponent);

    std::vector<std::pair<std::string, AdcConfig>> presets{{"configured", config_.adc}};
    for (const auto& [label, span] : config_.alternate_spans_mv) {
        presets.emplace_back(label, AdcConfig{config_.adc.bits, config_.adc.offset_mv, span});
    }
    presets.emplace_back("noise_margin", noise_margin_adc(model, bounds, config_.adc.bits));
    const auto sensitivity = certify_presets(model, bounds, presets, workers_);

    std::ostringstream csv;
    csv.precision(10);
    csv << "preset,offset_mv,span_mv,h_min_bits,regime\n";
    for (const auto& row : sensitivity) {
        csv << row.preset << ',' << row.adc.offset_mv << ',' << row.adc.span_mv << ','
            << row.h_min_bits << ',' << to_string(row.regime) << '\n';
    }
    write_text_file(path(kSensitivityCsv), csv.str());

    json doc = {{"report", report},
                {"ratio", ratio},
                {"pass", ratio.ok},
                {"bounds_source", bounds_source},
                {"extractor",
                 {{"n", config_.extractor_n},
                  {"m", config_.extractor_m},
                  {"adc_bits", config_.adc.bits},
                  {"security_exponent", config_.security_exponent}}},
                {"sensitivity", sensitivity}};
    json inputs = json::object();
    if (fs::exists(path(kCodesFile))) {
        const QuantizedTrace q = read_codes(path(kCodesFile));
        doc["empirical_min_entropy_bits"] = empirical_min_entropy(q);
        inputs[kCodesFile] = sha256_file(path(kCodesFile));
    }
    save_json(path(kCertificationFile), doc);

    log_ << "certify: h_min = " << report.h_min_bits << " bits/sample (worst noise "
         << report.worst_noise_mv << " mV, code " << report.worst_code << ", "
         << to_string(report.regime) << ")\n";
    for (const auto& row : sensitivity) {
        log_ << "  preset " << row.preset << ": span " << row.adc.span_mv << " mV -> "
             << row.h_min_bits << " bits\n";
    }
    log_ << "certify: extraction ratio " << (ratio.ok ? "ok" : "FAILS") << " for n="
         << config_.extractor_n << ", m=" << config_.extractor_m << " (available "
         << ratio.available_bits << " bits, slack " << ratio.slack_bits << ")\n";

    record_stage("certify",
                 json{{"inputs", inputs},
                      {"outputs",
                       {{kCertificationFile, sha256_file(path(kCertificationFile))},
                        {kSensitivityCsv, sha256_file(path(kSensitivityCsv))}}},
                      {"summary", {{"h_min_bits", report.h_min_bits}, {"ratio_ok", ratio.ok}}},
                      {"rates",
                       {{"h_min_bits", report.h_min_bits},
                        {"extraction_slack_bits", ratio.slack_bits}}}},
                 clock.seconds());
    return ratio.ok ? kExitOk : kExitCertification;
}

int Pipeline::extract() {
    config_.validate();
    const Stopwatch clock;
    std::string refusal;
    if (!fs::exists(path(kCertificationFile))) {
        refusal = "no certification report";
    } else {
        const json cert = load_json(path(kCertificationFile));
        const auto& ext = cert.at("extractor");
        if (cert.at("report").at("adc").get<AdcConfig>() != config_.adc ||
            ext.at("n").get<std::uint32_t>() != config_.extractor_n ||
            ext.at("m").get<std::uint32_t>() != config_.extractor_m ||
            ext.at("security_exponent").get<int>() != config_.security_exponent) {
            refusal = "certification report does not match the configured ADC or extractor";
        } else if (!cert.at("pass").get<bool>()) {
            refusal = "certification failed the extraction-ratio check";
        }
    }
    std::string warning;
    if (!refusal.empty()) {
        if (!force_) {
            log_ << "extract: refused: " << refusal << " (use --force to override)\n";
            return kExitCertification;
        }
        warning = "extraction forced: " + refusal;
        log_ << "extract: warning: " << warning << '\n';
    }

    const QuantizedTrace q = read_codes(path(kCodesFile));
    if (q.adc.bits != config_.adc.bits) {
        throw ConfigurationError("adc.bits", "codes were quantized with " +
                                                 std::to_string(q.adc.bits) + " bits");
    }
    std::string seed_source;
    const ToeplitzSeed seed = load_toeplitz_seed(config_, seed_source);
    write_file_bytes(path(kSeedFile), seed.serialize());

    const StreamResult result = extract_stream(seed, q, workers_, config_.kernel);
    write_file_bytes(path(kBitsFile), result.bytes);

    const double samples_used = static_cast<double>(result.blocks) *
                                (config_.extractor_n / static_cast<double>(q.adc.bits));
    const double bits_per_sample =
        samples_used > 0 ? static_cast<double>(result.output_bits) / samples_used : 0.0;
    const double fs_hz = 1.0 / q.sample_period_s;
    const double rate_bps = bits_per_sample * fs_hz;

    json doc = {{"input_samples", q.codes.size()},
                {"blocks", result.blocks},
                {"output_bits", result.output_bits},
                {"discarded_samples", result.discarded_samples},
                {"bits_per_sample", bits_per_sample},
                {"sampling_frequency_hz", fs_hz},
                {"implied_rate_bps", rate_bps},
                {"seed_source", seed_source},
                {"seed_fingerprint", seed.fingerprint()},
                {"forced", !warning.empty()}};
    save_json(path(kExtractionFile), doc);
    log_ << "extract: " << result.output_bits << " bits from " << result.blocks << " blocks, "
         << bits_per_sample << " bits/sample, implied rate " << rate_bps / 1e6 << " Mbps\n";

    json entry{{"inputs", {{kCodesFile, sha256_file(path(kCodesFile))}}},
               {"outputs",
                {{kSeedFile, sha256_file(path(kSeedFile))},
                 {kBitsFile, sha256_file(path(kBitsFile))},
                 {kExtractionFile, sha256_file(path(kExtractionFile))}}},
               {"summary", doc},
               {"rates",
                {{"bits_per_sample", bits_per_sample},
                 {"sampling_frequency_hz", fs_hz},
                 {"implied_rate_bps", rate_bps}}}};
    if (fs::exists(path(kCertificationFile))) {
        entry["inputs"][kCertificationFile] = sha256_file(path(kCertificationFile));
    }
    if (!warning.empty()) entry["warning"] = warning;
    record_stage("extract", std::move(entry), clock.seconds());
    return kExitOk;
}

int Pipeline::test(const fs::path& bits_path) {
    const fs::path input = bits_path.empty() ? path(kBitsFile) : bits_path;
    const auto bytes = read_file_bytes(input);
    if (bytes.empty()) throw InsufficientData(input.string() + ": empty bit file");
    return run_suite(bytes, 8 * bytes.size(), input);
}

int Pipeline::test_codes(const fs::path& codes_path) {
    const QuantizedTrace q = read_codes(codes_path);
    if (q.codes.empty()) throw InsufficientData(codes_path.string() + ": no codes");
    const auto k = static_cast<std::size_t>(q.adc.bits);
    std::vector<std::uint8_t> bytes((q.codes.size() * k + 7) / 8, 0);
    std::size_t bit = 0;
    for (auto c : q.codes) {
        for (std::size_t b = k; b-- > 0; ++bit) {
            if ((c >> b) & 1u) bytes[bit >> 3] |= static_cast<std::uint8_t>(0x80u >> (bit & 7));
        }
    }
    return run_suite(bytes, bit, codes_path);
}

int Pipeline::run_suite(std::span<const std::uint8_t> bytes, std::size_t bits,
                        const fs::path& input) {
    const Stopwatch clock;
    const TestSuiteResult result =
        suite(BitView(bytes, bits), SuiteOptions{config_.alpha, config_.max_lag, config_.block_len});
    save_json(path(kTestsFile), json(result));
    write_text_file(path(kPvalueCsv), suite_pvalue_csv(result));
    write_text_file(path(kAutocorrCsv), autocorr_csv(result.autocorr));

    for (const auto& t : result.tests) {
        if (t.name.rfind("autocorrelation_lag_", 0) == 0 && t.pass) continue;
        log_ << "test " << t.name << ": p = " << t.p_value
             << (t.applicable ? (t.pass ? " pass" : " FAIL") : " not applicable") << '\n';
    }
    log_ << "test: " << result.failures() << " failures over " << result.stream_length
         << " bits at alpha " << result.alpha << '\n';
    record_stage("test",
                 json{{"inputs", {{input.filename().string(), sha256_file(input)}}},
                      {"outputs",
                       {{kTestsFile, sha256_file(path(kTestsFile))},
                        {kPvalueCsv, sha256_file(path(kPvalueCsv))},
                        {kAutocorrCsv, sha256_file(path(kAutocorrCsv))}}},
                      {"summary",
                       {{"all_pass", result.all_pass()}, {"failures", result.failures()}}}},
                 clock.seconds());
    return result.all_pass() ? kExitOk : kExitTestFailure;
}

int Pipeline::run() {
    config_.validate();
    int code = kExitOk;
    if (config_.input_trace.empty()) {
        code = simulate();
    } else {
        IngestOptions opts;
        opts.input = config_.input_trace;
        opts.format = config_.input_trace.extension() == ".csv" ? InputFormat::Csv
                                                                 : InputFormat::Binary;
        code = ingest(opts);
    }
    if (code == kExitOk) code = quantize();
    if (code == kExitOk) code = certify();
    if (code == kExitOk) code = extract();
    if (code == kExitOk) code = test();
    return code;
}

int report_error(const std::exception& e, std::ostream& err) {
    if (dynamic_cast<const ConfigurationError*>(&e)) {
        err << "configuration error: " << e.what() << '\n';
        return kExitValidation;
    }
    if (dynamic_cast<const DegenerateInput*>(&e)) {
        err << "certification error: " << e.what() << '\n';
        return kExitCertification;
    }
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e) ||
        dynamic_cast<const json::exception*>(&e)) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    err << "error: " << e.what() << '\n';
    return kExitValidation;
}

}  // namespace qrng
