#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace techcast::scurve {

/// y(t) = L / (1 + exp(-k (t - t0))), t in months since window start.
struct SCurveParams {
    double L = 1.0;
    double k = 0.1;
    double t0 = 0.0;
};

double logistic(double t, const SCurveParams& p);

struct Interval {
    double lo;
    double hi;
};

/// One grid point: an initial guess plus the box the optimizer is confined to.
struct GridCell {
    SCurveParams init;
    Interval L;
    Interval k;
    Interval t0;
};

using Grid = std::vector<GridCell>;

/// The 4x4x4 data-driven grid: L0 in {1,2,4,8} x max(history) bounded by
/// 10 x max(history); k0 in {0.01,0.05,0.2,0.5} bounded by [1e-4, 2]; t0 in
/// {0.25,0.5,1,1.5} x len bounded by [-len, 3 len].
Grid default_grid(std::span<const double> history);

struct LmOptions {
    double initial_lambda = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 10.0;
    int max_iterations = 200;
    double relative_tolerance = 1e-10;
    /// Damping beyond which no step can decrease the SSE; treated as a
    /// stationary point.
    double max_lambda = 1e12;
};

struct CellResult {
    SCurveParams params;
    double sse = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Damped Gauss-Newton on sum_t (history[t] - logistic(t))^2 inside the
/// cell's box. Accepted steps never increase the SSE.
CellResult fit_cell(std::span<const double> history, const GridCell& cell, const LmOptions& options = {});

struct FitResult {
    SCurveParams params;
    double sse = 0.0;
    std::size_t grid_cell = 0;
    bool converged = false;
    /// Per-cell outcomes in grid order.
    std::vector<CellResult> cells;
};

class FitFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Best converged cell by SSE, ties to the lower cell index. Throws
/// std::invalid_argument for histories shorter than 8 and FitFailed when no
/// cell converges.
FitResult fit(std::span<const double> history, const Grid& grid, const LmOptions& options = {});
FitResult fit(std::span<const double> history);

/// logistic(history_len), ..., logistic(history_len + horizon - 1).
std::vector<double> forecast(const SCurveParams& params, std::size_t history_len, std::size_t horizon = 36);
std::vector<double> forecast(const FitResult& fit, std::size_t history_len, std::size_t horizon = 36);

}  // namespace techcast::scurve
