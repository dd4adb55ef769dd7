#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "qrng/checksum.hpp"
#include "qrng/config.hpp"
#include "qrng/errors.hpp"
#include "qrng/extractor.hpp"
#include "qrng/json_io.hpp"
#include "qrng/pipeline.hpp"

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned workers = 1;
    bool force = false;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
    auto* opt = cmd->add_option("--config", c.config, "pipeline config file");
    if (config_required) opt->required();
    cmd->add_option("--seed", c.seed, "override run.rng_seed");
    cmd->add_option("--out", c.out, "output directory (default: run.output_dir)");
    cmd->add_option("--workers", c.workers, "worker threads; never changes outputs")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--force", c.force, "extract even without a passing certification");
}

qrng::Pipeline make_pipeline(const Common& c, std::optional<double> alpha) {
    qrng::PipelineConfig config;
    if (!c.config.empty()) config = qrng::load_config(c.config);
    if (c.seed) config.rng_seed = *c.seed;
    if (alpha) config.alpha = *alpha;
    const std::filesystem::path out = c.out.empty() ? config.output_dir : std::filesystem::path(c.out);
    return qrng::Pipeline(std::move(config), out, c.workers, c.force, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum phase-noise random number pipeline"};
    app.require_subcommand(1);

    Common common;
    std::string format = "binary";
    std::string input;
    std::string sidecar;
    bool resample = false;
    bool no_header = false;
    std::optional<double> sample_period;
    std::optional<double> alpha;
    std::string codes;
    std::size_t bench_bytes = 8u << 20;
    int bench_runs = 5;

    auto* simulate = app.add_subcommand("simulate", "simulate an analog trace");
    add_common(simulate, common, true);

    auto* ingest = app.add_subcommand("ingest", "import a trace or raw codes");
    add_common(ingest, common, false);
    ingest->add_option("input", input, "file to import")->required();
    ingest->add_option("--format", format, "csv, binary or raw_u8")
        ->check(CLI::IsMember({"csv", "binary", "raw_u8"}));
    ingest->add_option("--sidecar", sidecar, "raw_u8 ADC sidecar (default <input>.json)");
    ingest->add_flag("--resample", resample, "interpolate nonuniform timestamps");
    ingest->add_flag("--no-header", no_header, "CSV has no header row");
    ingest->add_option("--sample-period", sample_period, "sample period in seconds");

    auto* quantize = app.add_subcommand("quantize", "digitize the analog trace");
    add_common(quantize, common, true);

    auto* certify = app.add_subcommand("certify", "worst-case min-entropy certification");
    add_common(certify, common, true);

    auto* extract = app.add_subcommand("extract", "Toeplitz extraction of certified codes");
    add_common(extract, common, true);

    auto* test = app.add_subcommand("test", "statistical tests on extracted bits");
    add_common(test, common, false);
    test->add_option("input", input, "bit file (default <out>/bits.bin)");
    test->add_option("--codes", codes, "run on a quantized code file instead of bits");
    test->add_option("--alpha", alpha, "significance level")->check(CLI::Range(0.0, 1.0));

    auto* run = app.add_subcommand("run", "full pipeline");
    add_common(run, common, true);

    auto* bench = app.add_subcommand("bench", "extractor throughput benchmark");
    add_common(bench, common, false);
    bench->add_option("--bytes", bench_bytes, "payload size in bytes");
    bench->add_option("--runs", bench_runs, "timed runs (median reported)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bench) {
            qrng::PipelineConfig config;
            if (!common.config.empty()) config = qrng::load_config(common.config);
            const auto seed = qrng::derive_seed(
                qrng::expand_seed_bytes(config.rng_seed, "toeplitz-seed",
                                        qrng::seed_bytes_required(config.extractor_n,
                                                                  config.extractor_m)),
                config.extractor_n, config.extractor_m);
            const auto report = qrng::throughput_benchmark(seed, bench_bytes, bench_runs,
                                                           common.workers, config.kernel);
            std::cout << nlohmann::json(report).dump(2) << '\n';
            return qrng::kExitOk;
        }
        qrng::Pipeline p = make_pipeline(common, alpha);
        if (*simulate) return p.simulate();
        if (*ingest) {
            qrng::IngestOptions opts;
            opts.format = qrng::parse_input_format(format);
            opts.input = input;
            opts.sidecar = sidecar;
            opts.has_header = !no_header;
            opts.resample = resample;
            opts.sample_period_s = sample_period;
            return p.ingest(opts);
        }
        if (*quantize) return p.quantize();
        if (*certify) return p.certify();
        if (*extract) return p.extract();
        if (*test) return codes.empty() ? p.test(input) : p.test_codes(codes);
        if (*run) return p.run();
    } catch (const std::exception& e) {
        return qrng::report_error(e, std::cerr);
    }
    return qrng::kExitValidation;
}
