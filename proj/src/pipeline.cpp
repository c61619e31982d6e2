#include "techcast/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <json.hpp>

#include "techcast/rng.hpp"

namespace techcast::cli {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string safe_name(std::string s) {
    for (auto& c : s)
        if (c == '/' || c == '\\' || c == ' ') c = '_';
    return s;
}

std::vector<MonthlySeries> obtain_series(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
    if (!config.series_path.empty() && fs::exists(config.series_path)) {
        fmt::print(log, "loading series from {}\n", config.series_path);
        return ingest::load_series(config.series_path);
    }
    if (config.corpus_path.empty())
        throw std::runtime_error("series file '" + config.series_path + "' not found and no corpus_path given");
    fmt::print(log, "ingesting corpus {}\n", config.corpus_path);
    ingest::BuildOptions opts;
    opts.min_length = config.min_length;
    auto built = ingest::ingest_file(config.corpus_path, opts);
    if (built.series.empty()) throw std::runtime_error("corpus yields no series of sufficient length");
    ingest::persist_series(built.series, out_dir / "series.csv");
    ingest::write_summary_json(built.summary, out_dir / "corpus_summary.json");
    fmt::print(log, "  {} records read, {} skipped, {} series kept, {} dropped\n", built.summary.n_records_read,
               built.summary.n_records_skipped, built.series.size(), built.summary.dropped_categories.size());
    return std::move(built.series);
}

nlohmann::json fit_rows(const std::vector<store::ForecastWindow>& windows, const eval::BenchmarkResult& b) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& f : b.forecasts) {
        const auto& w = windows[f.window_index];
        nlohmann::json row{{"category", w.category_id}, {"kind", store::to_string(w.kind)}};
        if (f.fit_params) {
            row["L"] = f.fit_params->L;
            row["k"] = f.fit_params->k;
            row["t0"] = f.fit_params->t0;
            row["sse"] = f.fit_sse;
            row["converged"] = true;
        } else {
            row["converged"] = false;
        }
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json arima_rows(const std::vector<store::ForecastWindow>& windows, const eval::BenchmarkResult& b) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& f : b.forecasts) {
        if (!f.arima_params) continue;
        const auto& w = windows[f.window_index];
        rows.push_back({{"category", w.category_id},
                        {"kind", store::to_string(w.kind)},
                        {"phi", f.arima_params->phi},
                        {"theta", f.arima_params->theta},
                        {"c", f.arima_params->c},
                        {"sigma2", f.arima_params->sigma2}});
    }
    return rows;
}

std::string reports_text(std::span<const eval::MetricRow> rows, int precision) {
    std::string out = "Overall\n";
    out += eval::format_text(eval::aggregate(rows, eval::GroupBy::Method), precision);
    out += "\nBy window type\n";
    out += eval::format_text(eval::aggregate(rows, eval::GroupBy::MethodAndKind), precision);
    return out;
}

std::string reports_csv(std::span<const eval::MetricRow> rows, int precision) {
    std::string out = eval::format_csv(eval::aggregate(rows, eval::GroupBy::Method), precision);
    const auto by_kind = eval::format_csv(eval::aggregate(rows, eval::GroupBy::MethodAndKind), precision);
    out += by_kind.substr(by_kind.find('\n') + 1);
    return out;
}

}  // namespace

int cmd_ingest(const IngestArgs& args, std::ostream& out, std::ostream& err) {
    try {
        ingest::BuildOptions opts;
        opts.min_length = args.min_length;
        opts.snapshot_end = args.snapshot_end;
        const auto built = ingest::ingest_file(args.input, opts);
        if (built.series.empty()) {
            fmt::print(err, "error: no category reaches min_length={}\n", args.min_length);
            return kExitFailure;
        }
        ingest::persist_series(built.series, args.output);
        const auto summary_path = args.summary.value_or(fs::path(args.output.string() + ".summary.json"));
        ingest::write_summary_json(built.summary, summary_path);
        const auto& s = built.summary;
        fmt::print(out, "records read      {}\n", s.n_records_read);
        fmt::print(out, "records skipped   {} (malformed {}, outside snapshot {}, dropped categories {})\n",
                   s.n_records_skipped, s.n_malformed, s.n_out_of_range, s.n_in_dropped_categories);
        fmt::print(out, "snapshot end      {} (trimmed)\n", s.snapshot_end_month.to_string());
        fmt::print(out, "categories kept   {}\n", s.categories.size());
        fmt::print(out, "categories dropped {}\n", s.dropped_categories.size());
        fmt::print(out, "wrote {} and {}\n", args.output.string(), summary_path.string());
        return kExitOk;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitFailure;
    }
}

ExperimentConfig apply_environment(ExperimentConfig config) {
    if (const char* env = std::getenv("TECHCAST_SEED"); env != nullptr && *env != '\0') {
        const std::string text(env);
        if (text.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("TECHCAST_SEED must be a non-negative integer");
        config.seed = std::stoull(text);
    }
    return config;
}

RunOutcome run_experiment(const ExperimentConfig& config, std::ostream& log) {
    RunOutcome outcome;
    const auto warn = [&](std::string msg) {
        fmt::print(log, "warning: {}\n", msg);
        outcome.warnings.push_back(std::move(msg));
    };
    try {
        config.validate();
        const fs::path out_dir(config.output_dir);
        fs::create_directories(out_dir);
        write_text(out_dir / "resolved_config.toml", to_text(config));

        auto series = obtain_series(config, out_dir, log);
        std::vector<MonthlySeries> usable;
        for (auto& s : series) {
            if (s.size() < std::max(config.min_length, store::kMinSeriesLength)) {
                warn(fmt::format("{}: {} months, below the window minimum; skipped", s.category_id, s.size()));
                continue;
            }
            usable.push_back(std::move(s));
        }
        if (usable.empty()) throw std::runtime_error("no series long enough to form forecast windows");
        outcome.windows = store::make_all_windows(usable);
        fmt::print(log, "{} series, {} windows\n", usable.size(), outcome.windows.size());

        const bool want_rnn =
            std::find(config.methods.begin(), config.methods.end(), eval::Method::RNN) != config.methods.end();
        std::optional<eval::TrainedRnn> trained;
        if (want_rnn) {
            std::vector<std::string> names;
            for (const auto& s : usable) names.push_back(s.category_id);
            outcome.split = store::split_categories(names, config.seed, config.validation_fraction,
                                                    config.test_fraction);
            store::write_split_json(*outcome.split, out_dir / "split.json");
            const std::set<std::string> train_set(outcome.split->train.begin(), outcome.split->train.end());
            const std::set<std::string> val_set(outcome.split->validation.begin(), outcome.split->validation.end());

            std::vector<store::TrainSample> samples;
            for (const auto& s : usable) {
                if (!train_set.contains(s.category_id)) continue;
                auto part = store::augment(s);
                samples.insert(samples.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
            }
            std::vector<store::ForecastWindow> val_windows;
            for (const auto& w : outcome.windows)
                if (val_set.contains(w.category_id)) val_windows.push_back(w);
            fmt::print(log, "split train/validation/test = {}/{}/{}, {} training samples\n",
                       outcome.split->train.size(), outcome.split->validation.size(), outcome.split->test.size(),
                       samples.size());

            const auto grid = deep::config_grid(config.base_model_config(), config.rnn_cells, config.rnn_hidden_sizes);
            fmt::print(log, "training {} RNN configuration(s), {} epochs each\n", grid.size(), config.rnn_epochs);
            outcome.selection = deep::select_model(grid, samples, val_windows);
            const auto& sel = *outcome.selection;

            const fs::path rnn_dir = out_dir / "rnn";
            fs::create_directories(rnn_dir);
            deep::save_weights(sel.weights, sel.config, rnn_dir / "weights.json");
            deep::write_loss_curve(sel.epoch_losses, rnn_dir / "loss_curve.csv");
            nlohmann::json cand = nlohmann::json::array();
            for (const auto& c : sel.candidates) {
                nlohmann::json j{{"config", deep::to_json(c.config)}};
                j["validation_mape"] = c.validation_mape ? nlohmann::json(*c.validation_mape) : nlohmann::json(nullptr);
                if (!c.error.empty()) {
                    j["error"] = c.error;
                    warn(fmt::format("RNN {}-{}: {}", deep::to_string(c.config.cell), c.config.hidden_size, c.error));
                }
                cand.push_back(j);
            }
            write_text(rnn_dir / "selection.json",
                       nlohmann::json{{"best", sel.best}, {"candidates", cand}}.dump(2) + "\n");
            fmt::print(log, "selected {}-{}\n", deep::to_string(sel.config.cell), sel.config.hidden_size);

            trained = eval::TrainedRnn{sel.weights, sel.config,
                                       {outcome.split->test.begin(), outcome.split->test.end()}};
        }

        eval::BenchmarkOptions bopts;
        bopts.scurve.max_iterations = config.scurve_max_iterations;
        bopts.scurve.initial_lambda = config.scurve_initial_lambda;
        bopts.scurve.relative_tolerance = config.scurve_relative_tolerance;
        bopts.arima.restarts = config.arima_restarts;
        bopts.arima.seed = config.seed;
        outcome.benchmark = eval::run_benchmark(outcome.windows, config.methods, trained ? &*trained : nullptr, bopts);
        const auto& bench = outcome.benchmark;
        if (bench.rows.empty()) throw std::runtime_error("no window produced a forecast");

        eval::save_metric_rows(bench.rows, out_dir / "metrics.csv");
        std::string failures = "method,category,kind,reason\n";
        for (const auto& f : bench.failures) {
            failures += fmt::format("{},{},{},\"{}\"\n", eval::to_string(f.method), f.category_id,
                                    store::to_string(f.kind), f.reason);
            warn(fmt::format("{} failed on {} {}: {}", eval::to_string(f.method), f.category_id,
                             store::to_string(f.kind), f.reason));
        }
        write_text(out_dir / "failures.csv", failures);
        write_text(out_dir / "fits_scurve.json", fit_rows(outcome.windows, bench).dump(2) + "\n");
        write_text(out_dir / "fits_arima.json", arima_rows(outcome.windows, bench).dump(2) + "\n");

        std::string report = reports_text(bench.rows, 1);
        if (!want_rnn) report += "\nRNN: not run (absent from methods)\n";
        write_text(out_dir / "report.txt", report);
        write_text(out_dir / "report.csv", reports_csv(bench.rows, 1));
        fmt::print(log, "\n{}", report);

        if (config.write_plots) {
            const fs::path plot_dir = out_dir / "plots";
            fs::create_directories(plot_dir);
            for (const auto& f : bench.forecasts) {
                if (!f.fit && !f.arima && !f.rnn) continue;
                const auto& w = outcome.windows[f.window_index];
                eval::emit_plotdata(w, f,
                                    plot_dir / (safe_name(w.category_id) + "_" + std::string(store::to_string(w.kind)) +
                                                ".csv"));
            }
        }
        fmt::print(log, "outputs in {}\n", out_dir.string());
    } catch (const std::exception& e) {
        fmt::print(log, "error: {}\n", e.what());
        outcome.exit_code = kExitFailure;
    }
    return outcome;
}

int cmd_report(const fs::path& rows_path, ReportFormat format, int precision, std::ostream& out, std::ostream& err) {
    try {
        const auto rows = eval::load_metric_rows(rows_path);
        if (rows.empty()) {
            fmt::print(err, "error: {} contains no metric rows\n", rows_path.string());
            return kExitFailure;
        }
        out << (format == ReportFormat::Text ? reports_text(rows, precision) : reports_csv(rows, precision));
        return kExitOk;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitFailure;
    }
}

int cmd_gradcheck(const GradcheckArgs& args, std::ostream& out) {
    Rng rng(args.seed);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<double> sample(store::kSampleLen);
    for (auto& v : sample) v = u(rng);
    const auto w = deep::Weights::init(args.cell, args.hidden_size, args.seed + 1);
    const auto check = deep::gradient_check(w, sample, store::kContextLen, args.epsilon, args.count, args.seed + 2);
    const bool ok = check.max_relative_error < args.tolerance;
    fmt::print(out, "cell={} hidden={} checked={} max_relative_error={:.3e} tolerance={:.1e} {}\n",
               deep::to_string(args.cell), args.hidden_size, check.checked, check.max_relative_error, args.tolerance,
               ok ? "PASS" : "FAIL");
    return ok ? kExitOk : kExitFailure;
}

}  // namespace techcast::cli
