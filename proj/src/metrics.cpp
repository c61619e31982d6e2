#include "techcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace techcast::eval {
namespace {

void check_lengths(std::size_t a, std::size_t f) {
    if (a != f) throw std::invalid_argument("metric: actuals and forecast differ in length");
    if (a == 0) throw std::invalid_argument("metric: empty input");
}

std::vector<double> widen(std::span<const std::int64_t> v) { return {v.begin(), v.end()}; }

}  // namespace

double rmse(std::span<const double> actuals, std::span<const double> forecast) {
    check_lengths(actuals.size(), forecast.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        const double d = actuals[i] - forecast[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(actuals.size()));
}

double rmse(std::span<const std::int64_t> actuals, std::span<const double> forecast) {
    return rmse(widen(actuals), forecast);
}

std::optional<double> mape(std::span<const double> actuals, std::span<const double> forecast) {
    check_lengths(actuals.size(), forecast.size());
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        if (actuals[i] == 0.0) continue;
        acc += std::abs(actuals[i] - forecast[i]) / std::abs(actuals[i]);
        ++used;
    }
    if (used == 0) return std::nullopt;
    return acc / static_cast<double>(used) * 100.0;
}

std::optional<double> mape(std::span<const std::int64_t> actuals, std::span<const double> forecast) {
    return mape(widen(actuals), forecast);
}

std::size_t mape_excluded_steps(std::span<const std::int64_t> actuals) {
    return static_cast<std::size_t>(std::count(actuals.begin(), actuals.end(), 0));
}

}  // namespace techcast::eval
