#include "techcast/evalharness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "techcast/arima.hpp"
#include "techcast/rng.hpp"
#include "techcast/scurve.hpp"

namespace techcast::eval {
namespace {

std::string real(double v) { return fmt::format("{:.17g}", v); }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("bad number '" + s + "'");
    return v;
}

int kind_rank(const std::optional<store::WindowKind>& k) {
    if (!k) return 2;
    return *k == store::WindowKind::Emerging ? 0 : 1;
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::FIT: return "FIT";
        case Method::ARIMA: return "ARIMA";
        case Method::RNN: return "RNN";
    }
    return "?";
}

Method method_from_string(std::string_view text) {
    std::string up(text);
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "FIT") return Method::FIT;
    if (up == "ARIMA") return Method::ARIMA;
    if (up == "RNN") return Method::RNN;
    throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

std::vector<Method> parse_methods(std::string_view text) {
    std::vector<Method> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto token = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (!token.empty()) {
            const Method m = method_from_string(token);
            if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

void write_metric_rows(std::ostream& out, std::span<const MetricRow> rows) {
    out << "method,category,kind,rmse,mape,mape_excluded_steps,fingerprint\n";
    for (const auto& r : rows) {
        out << to_string(r.method) << ',' << r.category_id << ',' << store::to_string(r.kind) << ',' << real(r.rmse)
            << ',' << (r.mape ? real(*r.mape) : std::string()) << ',' << r.mape_excluded_steps << ','
            << fmt::format("{:016x}", r.window_fingerprint) << '\n';
    }
}

void save_metric_rows(std::span<const MetricRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_metric_rows(out, rows);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<MetricRow> read_metric_rows(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("method,category,kind,rmse,mape", 0) != 0)
        throw std::runtime_error("metric rows: missing header");
    std::vector<MetricRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 7) throw std::runtime_error("metric rows line " + std::to_string(lineno) + ": expected 7 fields");
        MetricRow r;
        r.method = method_from_string(f[0]);
        r.category_id = f[1];
        r.kind = store::window_kind_from_string(f[2]);
        r.rmse = parse_double(f[3]);
        if (!f[4].empty()) r.mape = parse_double(f[4]);
        r.mape_excluded_steps = static_cast<std::size_t>(std::stoull(f[5]));
        r.window_fingerprint = std::stoull(f[6], nullptr, 16);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<MetricRow> load_metric_rows(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_metric_rows(in);
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ReportTable aggregate(std::span<const MetricRow> rows, GroupBy group_by) {
    if (rows.empty()) throw std::invalid_argument("aggregate: no metric rows");

    using Key = std::pair<Method, int>;
    std::map<Key, std::vector<const MetricRow*>> groups;
    for (const auto& r : rows) {
        const int kind = group_by == GroupBy::Method ? 2 : kind_rank(r.kind);
        groups[{r.method, kind}].push_back(&r);
    }

    ReportTable table;
    table.group_by = group_by;
    for (const auto& [key, members] : groups) {
        ReportRow row;
        row.method = key.first;
        if (key.second != 2)
            row.kind = key.second == 0 ? store::WindowKind::Emerging : store::WindowKind::Established;
        std::vector<double> rmses;
        std::vector<double> mapes;
        for (const auto* r : members) {
            rmses.push_back(r->rmse);
            if (r->mape) {
                mapes.push_back(*r->mape);
            } else {
                ++row.n_mape_excluded;
            }
        }
        row.n_windows = members.size();
        row.rmse_mean = std::accumulate(rmses.begin(), rmses.end(), 0.0) / static_cast<double>(rmses.size());
        row.rmse_median = median(rmses);
        if (!mapes.empty()) {
            const double mean = std::accumulate(mapes.begin(), mapes.end(), 0.0) / static_cast<double>(mapes.size());
            const double med = median(mapes);
            double var = 0.0;
            for (double m : mapes) var += (m - mean) * (m - mean);
            const double sd = std::sqrt(var / static_cast<double>(mapes.size()));
            row.mape_mean = mean;
            row.mape_median = med;
            row.mape_skew = sd > 0.0 ? (mean - med) / sd : 0.0;
        }
        table.rows.push_back(row);
    }
    return table;
}

namespace {

struct Cells {
    std::string method;
    std::string kind;
    std::array<std::optional<double>, 4> values;  // rmse mean, rmse median, mape mean, mape median
    std::string n;
};

std::vector<Cells> cells_of(const ReportTable& t) {
    std::vector<Cells> out;
    for (const auto& r : t.rows)
        out.push_back({std::string(to_string(r.method)), r.kind ? std::string(store::to_string(*r.kind)) : "all",
                       {r.rmse_mean, r.rmse_median, r.mape_mean, r.mape_median},
                       fmt::format("{}", r.n_windows)});
    return out;
}

// best[i][c]: row i holds the lowest column-c value among rows of its kind.
std::vector<std::array<bool, 4>> best_flags(const ReportTable& t, int precision) {
    std::vector<std::array<bool, 4>> flags(t.rows.size(), {false, false, false, false});
    const auto cells = cells_of(t);
    for (std::size_t c = 0; c < 4; ++c) {
        std::map<std::string, double> lowest;
        for (const auto& row : cells) {
            if (!row.values[c]) continue;
            const double v = std::stod(fmt::format("{:.{}f}", *row.values[c], precision));
            auto [it, inserted] = lowest.emplace(row.kind, v);
            if (!inserted) it->second = std::min(it->second, v);
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!cells[i].values[c]) continue;
            const double v = std::stod(fmt::format("{:.{}f}", *cells[i].values[c], precision));
            flags[i][c] = v == lowest[cells[i].kind];
        }
    }
    return flags;
}

std::string number(const std::optional<double>& v, int precision, bool best) {
    if (!v) return "n/a";
    return fmt::format("{:.{}f}{}", *v, precision, best ? "*" : "");
}

}  // namespace

std::string format_text(const ReportTable& t, int precision) {
    const auto cells = cells_of(t);
    const auto flags = best_flags(t, precision);
    std::vector<std::array<std::string, 5>> lines;
    lines.push_back({"Method", "Windows", "RMSE mean/median", "MAPE mean/median", "n"});
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        lines.push_back({c.method, c.kind,
                         number(c.values[0], precision, flags[i][0]) + "/" + number(c.values[1], precision, flags[i][1]),
                         number(c.values[2], precision, flags[i][2]) + "/" + number(c.values[3], precision, flags[i][3]),
                         c.n});
    }
    std::array<std::size_t, 5> width{};
    for (const auto& l : lines)
        for (std::size_t j = 0; j < 5; ++j) width[j] = std::max(width[j], l[j].size());
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            out += fmt::format("{:<{}}", lines[i][j], width[j]);
            out += j + 1 < 5 ? "  " : "";
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
        if (i == 0) out += std::string(width[0] + width[1] + width[2] + width[3] + width[4] + 8, '-') + '\n';
    }
    out += "* lowest value in the column for that window group\n";
    return out;
}

std::string format_csv(const ReportTable& t, int precision) {
    const auto flags = best_flags(t, precision);
    std::string out =
        "method,windows,rmse_mean,rmse_median,mape_mean,mape_median,n_windows,n_mape_excluded,mape_skew,best\n";
    const auto cells = cells_of(t);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        std::string best;
        static constexpr std::array<const char*, 4> kNames{"rmse_mean", "rmse_median", "mape_mean", "mape_median"};
        for (std::size_t c = 0; c < 4; ++c)
            if (flags[i][c]) best += (best.empty() ? "" : ";") + std::string(kNames[c]);
        const auto num = [&](const std::optional<double>& v) {
            return v ? fmt::format("{:.{}f}", *v, precision) : std::string();
        };
        out += fmt::format("{},{},{},{},{},{},{},{},{:.4f},{}\n", cells[i].method, cells[i].kind, num(r.rmse_mean),
                           num(r.rmse_median), num(r.mape_mean), num(r.mape_median), r.n_windows, r.n_mape_excluded,
                           r.mape_skew, best);
    }
    return out;
}

std::vector<double> naive_forecast(std::span<const std::int64_t> history, std::size_t horizon) {
    if (history.empty()) throw std::invalid_argument("naive_forecast: empty history");
    return std::vector<double>(horizon, static_cast<double>(history.back()));
}

BenchmarkResult run_benchmark(std::span<const store::ForecastWindow> windows, std::span<const Method> methods,
                              const TrainedRnn* rnn, const BenchmarkOptions& options) {
    BenchmarkResult result;
    const auto wants = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };

    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        const auto& w = windows[wi];
        WindowForecasts wf;
        wf.window_index = wi;
        const auto history = to_real(w.history);
        const auto fail = [&](Method m, std::string reason) {
            result.failures.push_back({m, w.category_id, w.kind, std::move(reason)});
        };
        const auto record = [&](Method m, const std::vector<double>& forecast) {
            MetricRow row;
            row.method = m;
            row.category_id = w.category_id;
            row.kind = w.kind;
            row.rmse = rmse(w.actuals, forecast);
            row.mape = mape(w.actuals, forecast);
            row.mape_excluded_steps = mape_excluded_steps(w.actuals);
            row.window_fingerprint = w.fingerprint();
            result.rows.push_back(std::move(row));
        };

        for (const Method m : {Method::FIT, Method::ARIMA, Method::RNN}) {
            if (!wants(m)) continue;
            try {
                switch (m) {
                    case Method::FIT: {
                        const auto fit = scurve::fit(history, scurve::default_grid(history), options.scurve);
                        wf.fit = scurve::forecast(fit, history.size(), w.actuals.size());
                        wf.fit_params = fit.params;
                        wf.fit_sse = fit.sse;
                        record(m, *wf.fit);
                        break;
                    }
                    case Method::ARIMA: {
                        const auto est = arima::estimate(history, options.arima);
                        wf.arima = arima::forecast(est, history.back(), w.actuals.size());
                        wf.arima_params = est.params;
                        record(m, *wf.arima);
                        break;
                    }
                    case Method::RNN: {
                        if (rnn == nullptr) {
                            fail(m, "no trained model");
                            break;
                        }
                        if (!rnn->test_categories.contains(w.category_id)) break;
                        wf.rnn = deep::forecast_window(w, rnn->weights, rnn->config);
                        record(m, *wf.rnn);
                        break;
                    }
                }
            } catch (const std::exception& e) {
                fail(m, e.what());
            }
        }
        result.forecasts.push_back(std::move(wf));
    }
    return result;
}

void write_plotdata(std::ostream& out, const store::ForecastWindow& window, const WindowForecasts& f) {
    if (!f.fit && !f.arima && !f.rnn) throw std::invalid_argument("emit_plotdata: no forecast present");
    const auto cell = [](const std::optional<std::vector<double>>& v, std::size_t h) {
        return v && h < v->size() ? real((*v)[h]) : std::string();
    };
    out << "month_index,actual,fit,arima,rnn\n";
    for (std::size_t h = 0; h < window.actuals.size(); ++h) {
        out << window.history.size() + h << ',' << window.actuals[h] << ',' << cell(f.fit, h) << ','
            << cell(f.arima, h) << ',' << cell(f.rnn, h) << '\n';
    }
}

void emit_plotdata(const store::ForecastWindow& window, const WindowForecasts& forecasts,
                   const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_plotdata(out, window, forecasts);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

MonthlySeries gen_logistic(double L, double k, double t0, std::size_t n, double noise_sigma, std::uint64_t seed,
                           std::string category) {
    if (!(L > 0.0) || !(k > 0.0) || n == 0) throw std::invalid_argument("gen_logistic: need L > 0, k > 0, n >= 1");
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    MonthlySeries s{std::move(category), YearMonth(2000, 1), {}};
    s.values.reserve(n);
    const scurve::SCurveParams p{L, k, t0};
    for (std::size_t t = 0; t < n; ++t) {
        double v = scurve::logistic(static_cast<double>(t), p);
        if (noise_sigma > 0.0) v += noise_sigma * noise(rng);
        s.values.push_back(static_cast<std::int64_t>(std::max(0.0, std::round(v))));
    }
    return s;
}

ArimaSimulation gen_arima(double phi, double theta, double c, double sigma, std::size_t n, std::uint64_t seed,
                          std::string category) {
    if (!(std::abs(phi) < 1.0) || !(std::abs(theta) < 1.0))
        throw std::invalid_argument("gen_arima: need |phi| < 1 and |theta| < 1");
    constexpr std::size_t kBurnIn = 200;
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    double y = c / (1.0 - phi);
    double e_prev = 0.0;
    ArimaSimulation sim;
    sim.raw.reserve(n);
    for (std::size_t t = 0; t < kBurnIn + n; ++t) {
        const double e = sigma > 0.0 ? noise(rng) : 0.0;
        y = c + phi * y + e + theta * e_prev;
        e_prev = e;
        if (t >= kBurnIn) sim.raw.push_back(y);
    }
    sim.series = MonthlySeries{std::move(category), YearMonth(2000, 1), {}};
    for (double v : sim.raw) sim.series.values.push_back(static_cast<std::int64_t>(std::max(0.0, std::round(v))));
    return sim;
}

}  // namespace techcast::eval
