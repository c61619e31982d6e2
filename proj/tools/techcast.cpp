// techcast: build arXiv category series and benchmark FIT / ARIMA / RNN
// technology forecasts.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "techcast/evalharness.hpp"
#include "techcast/ingest.hpp"
#include "techcast/pipeline.hpp"

namespace {

using namespace techcast;

struct SynthArgs {
    std::string out;
    std::string category;
    std::size_t n = 120;
    std::uint64_t seed = 1;
    double L = 500, k = 0.1, t0 = 60, noise = 0;
    double phi = 0.7, theta = 0.3, c = 2, sigma = 1;
};

int write_synth(const MonthlySeries& s, const std::string& out) {
    if (out.empty() || out == "-") {
        ingest::write_series_csv(std::cout, std::span<const MonthlySeries>(&s, 1));
    } else {
        ingest::persist_series(std::span<const MonthlySeries>(&s, 1), out);
        fmt::print(stderr, "wrote {} months of {} to {}\n", s.size(), s.category_id, out);
    }
    return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"techcast - technology forecasting benchmark on arXiv category series"};
    app.require_subcommand(1);

    cli::IngestArgs ingest_args;
    std::string ingest_in;
    std::string ingest_out;
    std::string ingest_summary;
    std::string ingest_end;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse an arXiv metadata snapshot into monthly series");
    ingest_cmd->add_option("--input,-i", ingest_in, "JSON-lines snapshot, optionally gzip-compressed")->required();
    ingest_cmd->add_option("--out,-o", ingest_out, "Series CSV to write")->required();
    ingest_cmd->add_option("--summary", ingest_summary, "Summary JSON (default <out>.summary.json)");
    ingest_cmd->add_option("--min-length", ingest_args.min_length, "Drop categories shorter than this (months)")
        ->capture_default_str();
    ingest_cmd->add_option("--snapshot-end", ingest_end, "Snapshot month YYYY-MM (default: latest month seen)");

    std::string config_path;
    std::string methods_override;
    std::string outdir_override;
    std::optional<std::uint64_t> seed_override;
    auto* run_cmd = app.add_subcommand("run", "Run the full benchmark from an experiment config");
    run_cmd->add_option("--config,-c", config_path, "Experiment config file")->required();
    run_cmd->add_option("--methods", methods_override, "Comma-separated subset of fit,arima,rnn");
    run_cmd->add_option("--output-dir", outdir_override, "Override output_dir");
    run_cmd->add_option("--seed", seed_override, "Override the seed (TECHCAST_SEED takes precedence)");

    std::string rows_path;
    std::string format = "text";
    int precision = 1;
    auto* report_cmd = app.add_subcommand("report", "Aggregate metric rows into mean/median tables");
    report_cmd->add_option("--rows,-r", rows_path, "metrics.csv from a run")->required();
    report_cmd->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
    report_cmd->add_option("--precision", precision, "Decimals")->check(CLI::Range(0, 12))->capture_default_str();

    cli::GradcheckArgs grad_args;
    std::string grad_cell = "lstm";
    auto* grad_cmd = app.add_subcommand("gradcheck", "Compare backprop gradients with finite differences");
    grad_cmd->add_option("--cell", grad_cell, "lstm or rnn")->check(CLI::IsMember({"lstm", "rnn"}))->capture_default_str();
    grad_cmd->add_option("--hidden", grad_args.hidden_size, "Hidden size")->check(CLI::PositiveNumber)->capture_default_str();
    grad_cmd->add_option("--seed", grad_args.seed, "Seed")->capture_default_str();
    grad_cmd->add_option("--epsilon", grad_args.epsilon, "Finite-difference step")->capture_default_str();
    grad_cmd->add_option("--count", grad_args.count, "Parameters to check")->capture_default_str();
    grad_cmd->add_option("--tolerance", grad_args.tolerance, "Maximum relative error")->capture_default_str();

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic series from the oracle generators");
    synth_cmd->require_subcommand(1);
    auto* logi = synth_cmd->add_subcommand("logistic", "Noisy logistic counts");
    logi->add_option("--L", synth.L)->capture_default_str();
    logi->add_option("--k", synth.k)->capture_default_str();
    logi->add_option("--t0", synth.t0)->capture_default_str();
    logi->add_option("--noise", synth.noise, "Gaussian noise sigma")->capture_default_str();
    auto* arma = synth_cmd->add_subcommand("arima", "ARIMA(1,0,1) simulation");
    arma->add_option("--phi", synth.phi)->capture_default_str();
    arma->add_option("--theta", synth.theta)->capture_default_str();
    arma->add_option("--c", synth.c)->capture_default_str();
    arma->add_option("--sigma", synth.sigma)->capture_default_str();
    for (auto* sub : {logi, arma}) {
        sub->add_option("--n", synth.n, "Months")->capture_default_str();
        sub->add_option("--seed", synth.seed)->capture_default_str();
        sub->add_option("--category", synth.category, "Category name");
        sub->add_option("--out,-o", synth.out, "Series CSV (stdout when omitted)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitUsage;
    }

    try {
        if (*ingest_cmd) {
            ingest_args.input = ingest_in;
            ingest_args.output = ingest_out;
            if (!ingest_summary.empty()) ingest_args.summary = ingest_summary;
            if (!ingest_end.empty()) {
                const auto m = YearMonth::parse(ingest_end);
                if (!m) {
                    fmt::print(stderr, "--snapshot-end: expected YYYY-MM\n");
                    return cli::kExitUsage;
                }
                ingest_args.snapshot_end = m;
            }
            return cli::cmd_ingest(ingest_args, std::cout, std::cerr);
        }
        if (*run_cmd) {
            cli::ExperimentConfig config;
            try {
                config = cli::load_config(config_path);
                if (!methods_override.empty()) config.methods = eval::parse_methods(methods_override);
                if (!outdir_override.empty()) config.output_dir = outdir_override;
                if (seed_override) config.seed = *seed_override;
                config = cli::apply_environment(config);
                config.validate();
            } catch (const std::invalid_argument& e) {
                fmt::print(stderr, "config error: {}\n", e.what());
                return cli::kExitUsage;
            }
            return cli::run_experiment(config, std::cerr).exit_code;
        }
        if (*report_cmd) {
            return cli::cmd_report(rows_path, format == "csv" ? cli::ReportFormat::Csv : cli::ReportFormat::Text,
                                   precision, std::cout, std::cerr);
        }
        if (*grad_cmd) {
            grad_args.cell = deep::cell_type_from_string(grad_cell);
            return cli::cmd_gradcheck(grad_args, std::cout);
        }
        if (*synth_cmd) {
            if (*logi) {
                return write_synth(eval::gen_logistic(synth.L, synth.k, synth.t0, synth.n, synth.noise, synth.seed,
                                                      synth.category.empty() ? "synthetic.logistic" : synth.category),
                                   synth.out);
            }
            return write_synth(eval::gen_arima(synth.phi, synth.theta, synth.c, synth.sigma, synth.n, synth.seed,
                                               synth.category.empty() ? "synthetic.arima" : synth.category)
                                   .series,
                               synth.out);
        }
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return cli::kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return cli::kExitFailure;
    }
    return cli::kExitOk;
}
