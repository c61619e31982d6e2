#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "techcast/arima.hpp"
#include "techcast/deepforecast.hpp"
#include "techcast/evalharness.hpp"
#include "techcast/ingest.hpp"
#include "techcast/scurve.hpp"
#include "techcast/seriesstore.hpp"

namespace py = pybind11;
using namespace techcast;

namespace {

py::object from_json(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(from_json(v));
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = from_json(v);
            return out;
        }
        default: return py::none();
    }
}

YearMonth parse_month(const std::string& text) {
    const auto m = YearMonth::parse(text);
    if (!m) throw py::value_error("expected YYYY-MM, got '" + text + "'");
    return *m;
}

py::dict fit_to_dict(const scurve::FitResult& f) {
    py::dict d;
    d["L"] = f.params.L;
    d["k"] = f.params.k;
    d["t0"] = f.params.t0;
    d["sse"] = f.sse;
    d["grid_cell"] = f.grid_cell;
    d["converged"] = f.converged;
    return d;
}

py::dict row_to_dict(const eval::MetricRow& r) {
    py::dict d;
    d["method"] = std::string(eval::to_string(r.method));
    d["category"] = r.category_id;
    d["kind"] = std::string(store::to_string(r.kind));
    d["rmse"] = r.rmse;
    d["mape"] = r.mape ? py::object(py::float_(*r.mape)) : py::object(py::none());
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "techcast: arXiv category series, S-curve / ARIMA / RNN technology forecasts";

    py::class_<MonthlySeries>(m, "MonthlySeries")
        .def(py::init([](std::string category, const std::string& start, std::vector<std::int64_t> values) {
                 return MonthlySeries{std::move(category), parse_month(start), std::move(values)};
             }),
             py::arg("category_id"), py::arg("start_month"), py::arg("values"))
        .def_readwrite("category_id", &MonthlySeries::category_id)
        .def_property(
            "start_month", [](const MonthlySeries& s) { return s.start_month.to_string(); },
            [](MonthlySeries& s, const std::string& v) { s.start_month = parse_month(v); })
        .def_readwrite("values", &MonthlySeries::values)
        .def("__len__", &MonthlySeries::size)
        .def("__eq__", [](const MonthlySeries& a, const MonthlySeries& b) { return a == b; })
        .def("__repr__", [](const MonthlySeries& s) {
            return "<MonthlySeries " + s.category_id + " from " + s.start_month.to_string() + ", " +
                   std::to_string(s.size()) + " months>";
        });

    // ingest
    m.def(
        "parse_record",
        [](const std::string& line) -> py::object {
            const auto rec = ingest::parse_record(line);
            if (!rec) return py::none();
            py::dict d;
            d["id"] = rec->id;
            d["primary_category"] = rec->primary_category;
            d["month"] = rec->first_version_month.to_string();
            return d;
        },
        py::arg("line"), "Parse one JSON-lines metadata record; None when it is skipped.");
    m.def(
        "ingest_file",
        [](const std::filesystem::path& path, std::size_t min_length, std::optional<std::string> snapshot_end) {
            ingest::BuildOptions opts;
            opts.min_length = min_length;
            if (snapshot_end) opts.snapshot_end = parse_month(*snapshot_end);
            auto built = ingest::ingest_file(path, opts);
            return py::make_tuple(built.series, from_json(ingest::to_json(built.summary)));
        },
        py::arg("path"), py::arg("min_length") = ingest::kDefaultMinLength, py::arg("snapshot_end") = py::none(),
        "Build monthly series from a (possibly gzipped) JSON-lines snapshot. Returns (series, summary).");
    m.def(
        "persist_series",
        [](const std::vector<MonthlySeries>& s, const std::filesystem::path& p) { ingest::persist_series(s, p); },
        py::arg("series"), py::arg("path"));
    m.def("load_series", &ingest::load_series, py::arg("path"));

    // seriesstore
    py::class_<store::ForecastWindow>(m, "ForecastWindow")
        .def_readonly("category_id", &store::ForecastWindow::category_id)
        .def_property_readonly("kind", [](const store::ForecastWindow& w) { return std::string(store::to_string(w.kind)); })
        .def_readonly("history", &store::ForecastWindow::history)
        .def_readonly("actuals", &store::ForecastWindow::actuals)
        .def("fingerprint", &store::ForecastWindow::fingerprint);
    m.def(
        "make_windows",
        [](const MonthlySeries& s) {
            auto pair = store::make_windows(s);
            return py::make_tuple(pair.emerging, pair.established);
        },
        py::arg("series"), "(emerging, established) windows of a series of at least 108 months.");
    m.def(
        "split_categories",
        [](std::vector<std::string> cats, std::uint64_t seed, double val, double test) {
            return from_json(store::to_json(store::split_categories(std::move(cats), seed, val, test)));
        },
        py::arg("categories"), py::arg("seed"), py::arg("validation_fraction") = 0.10, py::arg("test_fraction") = 0.10);

    py::class_<store::TrainSample>(m, "TrainSample")
        .def_readonly("category_id", &store::TrainSample::category_id)
        .def_readonly("raw_values", &store::TrainSample::raw_values)
        .def_readonly("scaled_values", &store::TrainSample::scaled_values)
        .def_readonly("scale", &store::TrainSample::scale)
        .def_readonly("split_index", &store::TrainSample::split_index);
    m.def("augment", &store::augment, py::arg("series"), py::arg("window_len") = store::kSampleLen,
          py::arg("stride") = 1, py::arg("context_len") = store::kContextLen);
    m.def(
        "unscale", [](const std::vector<double>& v, double s) { return store::unscale(v, s); }, py::arg("values"),
        py::arg("scale"));

    // scurve
    m.def(
        "logistic", [](double t, double L, double k, double t0) { return scurve::logistic(t, {L, k, t0}); },
        py::arg("t"), py::arg("L"), py::arg("k"), py::arg("t0"));
    m.def(
        "scurve_fit", [](const std::vector<double>& h) { return fit_to_dict(scurve::fit(h)); }, py::arg("history"),
        "Grid-searched logistic fit; dict with L, k, t0, sse, grid_cell, converged.");
    m.def(
        "scurve_forecast",
        [](double L, double k, double t0, std::size_t history_len, std::size_t horizon) {
            return scurve::forecast(scurve::SCurveParams{L, k, t0}, history_len, horizon);
        },
        py::arg("L"), py::arg("k"), py::arg("t0"), py::arg("history_len"), py::arg("horizon") = 36);

    // arima
    m.def(
        "arima_estimate",
        [](const std::vector<double>& h) {
            const auto e = arima::estimate(h);
            py::dict d;
            d["phi"] = e.params.phi;
            d["theta"] = e.params.theta;
            d["c"] = e.params.c;
            d["sigma2"] = e.params.sigma2;
            d["css"] = e.state.css;
            d["last_residual"] = e.state.residuals.back();
            return d;
        },
        py::arg("history"));
    m.def(
        "arima_forecast",
        [](double phi, double theta, double c, double last_y, double last_residual, std::size_t horizon) {
            return arima::forecast(arima::ArimaParams{phi, theta, c, 0.0}, last_y, last_residual, horizon);
        },
        py::arg("phi"), py::arg("theta"), py::arg("c"), py::arg("last_y"), py::arg("last_residual") = 0.0,
        py::arg("horizon") = 36);

    // metrics and synthetic oracles
    m.def(
        "rmse", [](const std::vector<double>& a, const std::vector<double>& f) { return eval::rmse(a, f); },
        py::arg("actuals"), py::arg("forecast"));
    m.def(
        "mape", [](const std::vector<double>& a, const std::vector<double>& f) { return eval::mape(a, f); },
        py::arg("actuals"), py::arg("forecast"), "Percent; None when every actual is zero.");
    m.def("gen_logistic", &eval::gen_logistic, py::arg("L"), py::arg("k"), py::arg("t0"), py::arg("n"),
          py::arg("noise_sigma") = 0.0, py::arg("seed") = 0, py::arg("category") = "synthetic.logistic");
    m.def(
        "gen_arima",
        [](double phi, double theta, double c, double sigma, std::size_t n, std::uint64_t seed) {
            auto sim = eval::gen_arima(phi, theta, c, sigma, n, seed);
            return py::make_tuple(sim.raw, sim.series);
        },
        py::arg("phi"), py::arg("theta"), py::arg("c"), py::arg("sigma"), py::arg("n"), py::arg("seed") = 0,
        "Returns (raw real-valued draws, integer MonthlySeries).");

    // deepforecast
    py::enum_<deep::CellType>(m, "CellType")
        .value("VanillaRNN", deep::CellType::VanillaRNN)
        .value("LSTM", deep::CellType::LSTM);
    py::class_<deep::ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("cell", &deep::ModelConfig::cell)
        .def_readwrite("hidden_size", &deep::ModelConfig::hidden_size)
        .def_readwrite("batch_size", &deep::ModelConfig::batch_size)
        .def_readwrite("learning_rate", &deep::ModelConfig::learning_rate)
        .def_readwrite("epochs", &deep::ModelConfig::epochs)
        .def_readwrite("seed", &deep::ModelConfig::seed)
        .def_readwrite("mc_samples", &deep::ModelConfig::mc_samples)
        .def_readonly("context_len", &deep::ModelConfig::context_len)
        .def_readonly("horizon", &deep::ModelConfig::horizon);
    py::class_<deep::Weights>(m, "Weights")
        .def_static("init", &deep::Weights::init, py::arg("cell"), py::arg("hidden_size"), py::arg("seed"))
        .def("parameter_count", &deep::Weights::parameter_count)
        .def("flatten", &deep::Weights::flatten);
    m.def(
        "gradient_check",
        [](const deep::Weights& w, const std::vector<double>& scaled, double epsilon, std::size_t count,
           std::uint64_t seed) {
            return deep::gradient_check(w, scaled, store::kContextLen, epsilon, count, seed).max_relative_error;
        },
        py::arg("weights"), py::arg("scaled_sample"), py::arg("epsilon") = 1e-5, py::arg("count") = 50,
        py::arg("seed") = 0, "Max relative error between backprop and central-difference gradients.");
    m.def(
        "train",
        [](const std::vector<store::TrainSample>& samples, const deep::ModelConfig& config) {
            py::gil_scoped_release release;
            auto r = deep::train(samples, config);
            return std::make_pair(std::move(r.weights), std::move(r.epoch_losses));
        },
        py::arg("samples"), py::arg("config"), "Returns (weights, per-epoch losses).");
    m.def(
        "rnn_forecast",
        [](const std::vector<double>& history, const deep::Weights& w, const deep::ModelConfig& config,
           std::uint64_t seed) {
            const auto f = deep::forecast(history, w, config, seed);
            std::vector<std::vector<double>> paths(static_cast<std::size_t>(f.paths.rows()));
            for (Eigen::Index i = 0; i < f.paths.rows(); ++i)
                paths[static_cast<std::size_t>(i)].assign(f.paths.row(i).begin(), f.paths.row(i).end());
            py::dict d;
            d["point"] = f.point;
            d["paths"] = paths;
            d["scale"] = f.scale;
            return d;
        },
        py::arg("history"), py::arg("weights"), py::arg("config"), py::arg("seed") = 0);

    // benchmark
    m.def(
        "benchmark",
        [](const std::vector<MonthlySeries>& series, const std::string& methods) {
            const auto windows = store::make_all_windows(series);
            const auto ms = eval::parse_methods(methods);
            const auto result = eval::run_benchmark(windows, ms);
            py::list rows;
            for (const auto& r : result.rows) rows.append(row_to_dict(r));
            return rows;
        },
        py::arg("series"), py::arg("methods") = "fit,arima",
        "FIT/ARIMA metric rows over both windows of every series.");
    m.def(
        "report",
        [](const std::filesystem::path& rows_path, bool by_kind, int precision) {
            const auto rows = eval::load_metric_rows(rows_path);
            return eval::format_text(
                eval::aggregate(rows, by_kind ? eval::GroupBy::MethodAndKind : eval::GroupBy::Method), precision);
        },
        py::arg("rows_path"), py::arg("by_kind") = false, py::arg("precision") = 1);

    m.attr("__version__") = "0.1.0";
}
