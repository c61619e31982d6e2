#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "techcast/arima.hpp"
#include "techcast/deepforecast.hpp"
#include "techcast/metrics.hpp"
#include "techcast/scurve.hpp"
#include "techcast/seriesstore.hpp"

namespace techcast::eval {

enum class Method { FIT, ARIMA, RNN };

std::string_view to_string(Method m);
Method method_from_string(std::string_view text);
/// Parses a comma-separated list such as "fit,arima".
std::vector<Method> parse_methods(std::string_view text);

struct MetricRow {
    Method method = Method::FIT;
    std::string category_id;
    store::WindowKind kind = store::WindowKind::Emerging;
    double rmse = 0.0;
    std::optional<double> mape;
    std::size_t mape_excluded_steps = 0;
    std::uint64_t window_fingerprint = 0;
};

/// CSV: method,category,kind,rmse,mape,mape_excluded_steps,fingerprint.
/// Undefined MAPE is an empty field; reals use 17 significant digits.
void write_metric_rows(std::ostream& out, std::span<const MetricRow> rows);
void save_metric_rows(std::span<const MetricRow> rows, const std::filesystem::path& path);
std::vector<MetricRow> read_metric_rows(std::istream& in);
std::vector<MetricRow> load_metric_rows(const std::filesystem::path& path);

enum class GroupBy { Method, MethodAndKind };

struct ReportRow {
    Method method = Method::FIT;
    std::optional<store::WindowKind> kind;  // nullopt = all windows
    double rmse_mean = 0.0;
    double rmse_median = 0.0;
    std::optional<double> mape_mean;
    std::optional<double> mape_median;
    std::size_t n_windows = 0;
    std::size_t n_mape_excluded = 0;  // windows whose MAPE is undefined
    /// (mean - median) / standard deviation of the defined MAPEs, 0 when the
    /// spread is zero.
    double mape_skew = 0.0;
};

struct ReportTable {
    GroupBy group_by = GroupBy::Method;
    std::vector<ReportRow> rows;  // method order FIT, ARIMA, RNN; emerging before established
};

/// Average of the two middle values for even sizes. Throws on empty input.
double median(std::vector<double> values);

/// Throws std::invalid_argument on empty input.
ReportTable aggregate(std::span<const MetricRow> rows, GroupBy group_by);

/// Aligned text in the "mean/median" layout; the lowest value of each column
/// among rows of the same window kind is marked with '*'.
std::string format_text(const ReportTable& table, int precision = 1);
std::string format_csv(const ReportTable& table, int precision = 1);

struct WindowFailure {
    Method method = Method::FIT;
    std::string category_id;
    store::WindowKind kind = store::WindowKind::Emerging;
    std::string reason;
};

struct WindowForecasts {
    std::size_t window_index = 0;
    std::optional<std::vector<double>> fit;
    std::optional<std::vector<double>> arima;
    std::optional<std::vector<double>> rnn;
    std::optional<scurve::SCurveParams> fit_params;
    double fit_sse = 0.0;
    std::optional<arima::ArimaParams> arima_params;
};

struct TrainedRnn {
    deep::Weights weights;
    deep::ModelConfig config;
    std::set<std::string> test_categories;
};

struct BenchmarkResult {
    std::vector<MetricRow> rows;  // window order, then method order
    std::vector<WindowFailure> failures;
    std::vector<WindowForecasts> forecasts;  // one entry per window
};

struct BenchmarkOptions {
    scurve::LmOptions scurve;
    arima::EstimateOptions arima;
};

/// FIT and ARIMA run on every window; RNN only on windows of test
/// categories, and only when a trained model is supplied.
BenchmarkResult run_benchmark(std::span<const store::ForecastWindow> windows, std::span<const Method> methods,
                              const TrainedRnn* rnn = nullptr, const BenchmarkOptions& options = {});

/// Repeat-last-value baseline.
std::vector<double> naive_forecast(std::span<const std::int64_t> history, std::size_t horizon = store::kHorizon);

/// CSV month_index,actual,fit,arima,rnn; absent methods are empty fields.
void emit_plotdata(const store::ForecastWindow& window, const WindowForecasts& forecasts,
                   const std::filesystem::path& path);
void write_plotdata(std::ostream& out, const store::ForecastWindow& window, const WindowForecasts& forecasts);

/// Rounded, non-negative logistic counts plus Gaussian noise.
MonthlySeries gen_logistic(double L, double k, double t0, std::size_t n, double noise_sigma, std::uint64_t seed,
                           std::string category = "synthetic.logistic");

struct ArimaSimulation {
    std::vector<double> raw;  // real-valued draws after burn-in
    MonthlySeries series;     // raw rounded and clamped to non-negative integers
};

/// y_t = c + phi y_{t-1} + e_t + theta e_{t-1}, e ~ N(0, sigma^2), after a
/// 200-step burn-in. Throws std::invalid_argument unless |phi|, |theta| < 1.
ArimaSimulation gen_arima(double phi, double theta, double c, double sigma, std::size_t n, std::uint64_t seed,
                          std::string category = "synthetic.arima");

}  // namespace techcast::eval
