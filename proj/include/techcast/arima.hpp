#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace techcast::arima {

/// ARIMA(1,0,1) with intercept: y_t = c + phi y_{t-1} + e_t + theta e_{t-1}.
struct ArimaParams {
    double phi = 0.0;
    double theta = 0.0;
    double c = 0.0;
    double sigma2 = 0.0;

    [[nodiscard]] double mean() const { return c / (1.0 - phi); }
};

struct ArimaFitState {
    std::vector<double> residuals;  // e_1 = 0, aligned with the history
    double css = 0.0;
};

/// Coefficient box: |phi|, |theta| <= this bound.
inline constexpr double kCoefficientBound = 0.999;

/// Residual recursion e_t = y_t - c - phi y_{t-1} - theta e_{t-1}, e_1 = 0.
ArimaFitState residuals(std::span<const double> y, double c, double phi, double theta);

struct EstimateOptions {
    int restarts = 3;
    std::uint64_t seed = 20240101;
};

struct Estimate {
    ArimaParams params;
    ArimaFitState state;
};

/// Conditional-sum-of-squares fit by Nelder-Mead from jittered starts around
/// (c = mean/2, phi = 0.5, theta = 0). Throws std::invalid_argument for fewer
/// than 10 observations and std::runtime_error for a non-finite optimum.
Estimate estimate(std::span<const double> history, const EstimateOptions& options = {});

/// Point forecast; future innovations take their zero expectation.
std::vector<double> forecast(const ArimaParams& params, double last_y, double last_residual,
                             std::size_t horizon = 36);
std::vector<double> forecast(const Estimate& fit, double last_y, std::size_t horizon = 36);

}  // namespace techcast::arima
