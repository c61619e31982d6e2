#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace techcast::eval {

/// sqrt(mean((a - f)^2)). Throws std::invalid_argument on length mismatch or
/// empty input.
double rmse(std::span<const double> actuals, std::span<const double> forecast);
double rmse(std::span<const std::int64_t> actuals, std::span<const double> forecast);

/// Mean of |a - f| / a * 100 over steps with a != 0; nullopt when every
/// actual is zero.
std::optional<double> mape(std::span<const double> actuals, std::span<const double> forecast);
std::optional<double> mape(std::span<const std::int64_t> actuals, std::span<const double> forecast);

/// Number of zero actuals skipped by mape().
std::size_t mape_excluded_steps(std::span<const std::int64_t> actuals);

}  // namespace techcast::eval
