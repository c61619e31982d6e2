#include "techcast/scurve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace techcast::scurve {
namespace {

// Logistic sigmoid without overflow for large |z|.
double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double sse_of(std::span<const double> y, const SCurveParams& p) {
    double sse = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double r = y[t] - logistic(static_cast<double>(t), p);
        sse += r * r;
    }
    return sse;
}

SCurveParams clamp_to(const GridCell& cell, const Eigen::Vector3d& v) {
    return {std::clamp(v[0], cell.L.lo, cell.L.hi), std::clamp(v[1], cell.k.lo, cell.k.hi),
            std::clamp(v[2], cell.t0.lo, cell.t0.hi)};
}

}  // namespace

double logistic(double t, const SCurveParams& p) { return p.L * sigmoid(p.k * (t - p.t0)); }

Grid default_grid(std::span<const double> history) {
    double peak = 0.0;
    for (double v : history) peak = std::max(peak, v);
    peak = std::max(peak, 1.0);
    const auto n = static_cast<double>(history.size());

    Grid grid;
    grid.reserve(64);
    for (double lf : {1.0, 2.0, 4.0, 8.0})
        for (double k0 : {0.01, 0.05, 0.2, 0.5})
            for (double tf : {0.25, 0.5, 1.0, 1.5})
                grid.push_back(GridCell{{lf * peak, k0, tf * n},
                                        {1e-6 * peak, 10.0 * peak},
                                        {1e-4, 2.0},
                                        {-n, 3.0 * n}});
    return grid;
}

CellResult fit_cell(std::span<const double> y, const GridCell& cell, const LmOptions& options) {
    const std::size_t n = y.size();
    SCurveParams p = clamp_to(cell, Eigen::Vector3d(cell.init.L, cell.init.k, cell.init.t0));
    double sse = sse_of(y, p);
    double lambda = options.initial_lambda;

    CellResult out;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        out.iterations = iter + 1;
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (std::size_t t = 0; t < n; ++t) {
            const double dt = static_cast<double>(t) - p.t0;
            const double s = sigmoid(p.k * dt);
            const double ds = s * (1.0 - s);
            const Eigen::Vector3d j(s, p.L * ds * dt, -p.L * ds * p.k);
            jtj.noalias() += j * j.transpose();
            jtr += j * (y[t] - p.L * s);
        }
        if (sse == 0.0 || jtr.squaredNorm() == 0.0) {
            out.converged = true;
            break;
        }

        const double floor = 1e-12 * std::max(jtj.trace(), std::numeric_limits<double>::min());
        bool accepted = false;
        while (lambda <= options.max_lambda) {
            Eigen::Matrix3d a = jtj;
            for (int i = 0; i < 3; ++i) a(i, i) += lambda * std::max(jtj(i, i), floor);
            const Eigen::LDLT<Eigen::Matrix3d> ldlt(a);
            const Eigen::Vector3d delta = ldlt.solve(jtr);
            if (ldlt.info() == Eigen::Success && delta.allFinite()) {
                const SCurveParams trial = clamp_to(cell, Eigen::Vector3d(p.L, p.k, p.t0) + delta);
                const double trial_sse = sse_of(y, trial);
                if (std::isfinite(trial_sse) && trial_sse <= sse) {
                    const double change = sse - trial_sse;
                    p = trial;
                    sse = trial_sse;
                    lambda = std::max(lambda / options.lambda_down, 1e-12);
                    accepted = true;
                    if (change <= options.relative_tolerance * sse) out.converged = true;
                    break;
                }
            }
            lambda *= options.lambda_up;
        }
        if (!accepted) {
            out.converged = true;  // no descent direction left at any damping
            break;
        }
        if (out.converged) break;
    }
    out.params = p;
    out.sse = sse;
    return out;
}

FitResult fit(std::span<const double> history, const Grid& grid, const LmOptions& options) {
    if (history.size() < 8) throw std::invalid_argument("scurve::fit: history needs at least 8 points");
    FitResult result;
    result.cells.reserve(grid.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto cell = fit_cell(history, grid[i], options);
        if (cell.converged && std::isfinite(cell.sse) && cell.sse < best) {
            best = cell.sse;
            result.params = cell.params;
            result.sse = cell.sse;
            result.grid_cell = i;
            result.converged = true;
        }
        result.cells.push_back(cell);
    }
    if (!result.converged) throw FitFailed("fit failed: no grid cell converged");
    return result;
}

FitResult fit(std::span<const double> history) { return fit(history, default_grid(history)); }

std::vector<double> forecast(const SCurveParams& params, std::size_t history_len, std::size_t horizon) {
    std::vector<double> out(horizon);
    for (std::size_t h = 0; h < horizon; ++h) out[h] = logistic(static_cast<double>(history_len + h), params);
    return out;
}

std::vector<double> forecast(const FitResult& fit, std::size_t history_len, std::size_t horizon) {
    if (!fit.converged) throw std::invalid_argument("scurve::forecast: fit did not converge");
    return forecast(fit.params, history_len, horizon);
}

}  // namespace techcast::scurve
