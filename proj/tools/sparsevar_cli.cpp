#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sparsevar/error.hpp"
#include "sparsevar/infer.hpp"
#include "sparsevar/panel.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/simgen.hpp"

namespace sv = sparsevar;

namespace {

struct InferArgs {
    std::string panel;
    std::string method = "ldpe";
    double alpha = 0.05;
    int boot_b = 500;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "out";
    std::string cache;
    bool standardize = false;
    double lambda = 0.0;
    double node_lambda = 0.0;
    int folds = 10;
    bool quiet = false;
};

void print_autocorrelation(const sv::SeriesTable& table) {
    const sv::Vector rho = sv::lag1_autocorrelation(table.values);
    std::fprintf(stderr, "lag-1 autocorrelation:\n");
    for (sv::Index k = 0; k < rho.size(); ++k)
        std::fprintf(stderr, "  %-16s % .4f\n", table.columns[static_cast<std::size_t>(k)].c_str(), rho[k]);
}

sv::InferOptions infer_options(const InferArgs& a) {
    sv::InferOptions o;
    o.method = sv::parse_method(a.method);
    o.alpha = a.alpha;
    o.bootstrap_b = a.boot_b;
    o.seed = a.seed;
    o.threads = a.threads;
    o.standardize = a.standardize;
    if (a.folds < 2) throw sv::ConfigError("--folds must be at least 2");
    o.lambda = a.lambda > 0.0 ? sv::LambdaSpec::fixed_value(a.lambda) : sv::LambdaSpec::cross_validated(a.folds);
    o.nodewise.lambda =
        a.node_lambda > 0.0 ? sv::LambdaSpec::fixed_value(a.node_lambda) : sv::LambdaSpec::cross_validated(a.folds);
    if (!a.cache.empty()) o.precision_cache = a.cache;
    return o;
}

sv::LaggedPanel load_panel(const InferArgs& a) {
    const sv::SeriesTable table = sv::read_series_csv(std::filesystem::path(a.panel));
    if (!a.quiet) print_autocorrelation(table);
    return sv::build_panel(table.values, table.columns);
}

int run_infer(const InferArgs& a) {
    const sv::InferOptions options = infer_options(a);
    const sv::LaggedPanel panel = load_panel(a);
    const sv::InferenceMatrixResult result = sv::infer_matrix(panel, options);
    sv::emit_outputs(result, a.out);
    std::printf("n=%lld p=%lld method=%s significant=%lld failures=%zu\n", static_cast<long long>(result.n),
                static_cast<long long>(result.p()), std::string(sv::to_string(options.method)).c_str(),
                static_cast<long long>(result.significant_count()), result.failures.size());
    for (const auto& f : result.failures)
        std::fprintf(stderr, "equation %lld (%s) failed in %s: %s\n", static_cast<long long>(f.equation),
                     result.labels[static_cast<std::size_t>(f.equation)].c_str(), f.stage.c_str(), f.message.c_str());
    return 0;
}

int run_cache(const InferArgs& a) {
    if (a.cache.empty()) throw sv::ConfigError("cache-precision needs --cache");
    const sv::InferOptions options = infer_options(a);
    const sv::LaggedPanel panel = load_panel(a);
    bool loaded = false;
    const sv::PrecisionEstimate est = sv::cache_precision(panel, options, &loaded);
    std::printf("%s %s (p=%lld)\n", loaded ? "reused" : "wrote", a.cache.c_str(), static_cast<long long>(est.p()));
    return 0;
}

int run_simulate(const std::string& config_path, const std::string& out, const std::string& records, int threads,
                 bool threads_set) {
    sv::ExperimentConfig config = sv::load_experiment_config(config_path);
    if (threads_set) config.threads = threads;
    std::vector<sv::ReplicationRecord> recs;
    const sv::SimulationReport report = sv::run_experiment(config, &recs);
    std::ofstream csv(out);
    if (!csv) throw sv::DataError("cannot write " + out);
    sv::write_report_csv(csv, report);
    if (!records.empty()) {
        std::ofstream jl(records);
        if (!jl) throw sv::DataError("cannot write " + records);
        sv::write_records_jsonl(jl, recs);
    }
    for (const auto& g : report.groups)
        std::printf("%-14s %-8s entries=%-4d bias=%.4f rmse=%.4f coverage=%.3f length=%.4f\n",
                    std::string(sv::to_string(g.method)).c_str(), g.group.c_str(), g.entries, g.abs_bias, g.rmse,
                    g.coverage, g.mean_length);
    if (!report.failures.empty()) std::fprintf(stderr, "%zu failed fits dropped\n", report.failures.size());
    return 0;
}

int run_ingest(const std::string& prices, const std::string& out, bool quiet) {
    const sv::SeriesTable returns = sv::ingest_prices(std::filesystem::path(prices));
    if (!quiet) print_autocorrelation(returns);
    if (out.empty() || out == "-") {
        sv::write_series_csv(std::cout, returns);
    } else {
        std::ofstream os(out);
        if (!os) throw sv::DataError("cannot write " + out);
        sv::write_series_csv(os, returns);
    }
    std::fprintf(stderr, "%zu return rows, lagged panel n=%zu\n", returns.row_labels.size(),
                 returns.row_labels.empty() ? std::size_t{0} : returns.row_labels.size() - 1);
    return 0;
}

void add_model_flags(CLI::App* cmd, InferArgs& a) {
    cmd->add_option("panel,--panel", a.panel, "CSV of observations: date column then one column per series")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--alpha", a.alpha, "Miscoverage level")->check(CLI::Range(1e-12, 1.0 - 1e-12));
    cmd->add_option("--seed", a.seed, "Top-level seed");
    cmd->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--lambda", a.lambda, "Fixed equation penalty (default: cross-validated)");
    cmd->add_option("--node-lambda", a.node_lambda, "Fixed nodewise penalty (default: cross-validated)");
    cmd->add_option("--folds", a.folds, "Cross-validation folds");
    cmd->add_flag("--standardize", a.standardize, "Scale predictors to unit root mean square");
    cmd->add_flag("-q,--quiet", a.quiet, "Skip the autocorrelation diagnostic");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse VAR(1) transition-matrix inference with de-biased Lasso intervals"};
    app.set_version_flag("--version", sv::kVersion);
    app.require_subcommand(1);

    InferArgs a;
    a.threads = sv::default_threads();

    auto* infer = app.add_subcommand("infer", "Confidence intervals for every transition-matrix entry");
    add_model_flags(infer, a);
    infer->add_option("--method", a.method, "ldpe, bt_ldpe or multi_bt_ldpe");
    infer->add_option("--boot-b", a.boot_b, "Bootstrap replicates")->check(CLI::PositiveNumber);
    infer->add_option("--out", a.out, "Output directory");
    infer->add_option("--precision-cache", a.cache, "Reuse or write the nodewise pass at this path");

    auto* cache = app.add_subcommand("cache-precision", "Precompute or reuse the nodewise pass");
    add_model_flags(cache, a);
    cache->add_option("--cache", a.cache, "Cache file")->required();

    std::string config_path, report_out = "report.csv", records_out;
    int sim_threads = 1;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo experiment from a JSON config");
    simulate->add_option("config,--config", config_path, "Experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--out", report_out, "Report CSV");
    simulate->add_option("--records", records_out, "Optional per-replication JSON lines");
    auto* sim_threads_opt = simulate->add_option("--threads", sim_threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string prices, returns_out;
    bool ingest_quiet = false;
    auto* ingest = app.add_subcommand("ingest", "Convert a price CSV to simple returns");
    ingest->add_option("prices,--prices", prices, "CSV of dated prices")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", returns_out, "Returns CSV (default stdout)");
    ingest->add_flag("-q,--quiet", ingest_quiet, "Skip the autocorrelation diagnostic");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(sv::ErrorKind::config);
    }

    try {
        if (*infer) return run_infer(a);
        if (*cache) return run_cache(a);
        if (*simulate)
            return run_simulate(config_path, report_out, records_out, sim_threads, sim_threads_opt->count() > 0);
        if (*ingest) return run_ingest(prices, returns_out, ingest_quiet);
    } catch (const sv::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(sv::ErrorKind::data);
    }
    return 0;
}
