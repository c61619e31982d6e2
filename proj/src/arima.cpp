#include "techcast/arima.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "techcast/rng.hpp"
#include "techcast/simplex.hpp"

namespace techcast::arima {
namespace {

double clamp_coef(double v) { return std::clamp(v, -kCoefficientBound, kCoefficientBound); }

double css_of(std::span<const double> y, double c, double phi, double theta) {
    double css = 0.0;
    double e = 0.0;
    for (std::size_t t = 1; t < y.size(); ++t) {
        e = y[t] - c - phi * y[t - 1] - theta * e;
        css += e * e;
    }
    return css;
}

}  // namespace

ArimaFitState residuals(std::span<const double> y, double c, double phi, double theta) {
    ArimaFitState state;
    state.residuals.assign(y.size(), 0.0);
    for (std::size_t t = 1; t < y.size(); ++t) {
        const double e = y[t] - c - phi * y[t - 1] - theta * state.residuals[t - 1];
        state.residuals[t] = e;
        state.css += e * e;
    }
    return state;
}

Estimate estimate(std::span<const double> y, const EstimateOptions& options) {
    if (y.size() < 10) throw std::invalid_argument("arima::estimate: history needs at least 10 points");

    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(y.size()));

    // x = (c, phi, theta); the box is enforced by projecting every trial point.
    const auto project = [](std::vector<double> x) {
        x[1] = clamp_coef(x[1]);
        x[2] = clamp_coef(x[2]);
        return x;
    };
    const optim::Objective objective = [&](const std::vector<double>& raw) {
        const auto x = project(raw);
        return css_of(y, x[0], x[1], x[2]);
    };

    const std::vector<double> start{mean * (1.0 - 0.5), 0.5, 0.0};
    const std::vector<double> steps{0.1 * std::max({std::abs(start[0]), sd, 1e-3}), 0.1, 0.1};

    Rng rng(options.seed);
    std::normal_distribution<double> jitter(0.0, 1.0);
    optim::SimplexResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(options.restarts, 1); ++r) {
        auto x0 = start;
        if (r > 0) {
            x0[0] += steps[0] * jitter(rng);
            x0[1] = clamp_coef(x0[1] + 0.2 * jitter(rng));
            x0[2] = clamp_coef(x0[2] + 0.2 * jitter(rng));
        }
        auto res = optim::nelder_mead(objective, x0, steps);
        // Restart from the optimum once; Nelder-Mead can stall on a collapsed simplex.
        res = optim::nelder_mead(objective, project(res.x), steps);
        if (res.value < best.value) best = res;
    }
    if (!std::isfinite(best.value)) throw std::runtime_error("arima::estimate: non-finite objective");

    const auto x = project(best.x);
    Estimate out;
    out.params.c = x[0];
    out.params.phi = x[1];
    out.params.theta = x[2];
    out.state = residuals(y, x[0], x[1], x[2]);
    out.params.sigma2 = out.state.css / static_cast<double>(y.size() - 3);
    return out;
}

std::vector<double> forecast(const ArimaParams& p, double last_y, double last_residual, std::size_t horizon) {
    std::vector<double> out(horizon);
    if (horizon == 0) return out;
    out[0] = p.c + p.phi * last_y + p.theta * last_residual;
    for (std::size_t h = 1; h < horizon; ++h) out[h] = p.c + p.phi * out[h - 1];
    return out;
}

std::vector<double> forecast(const Estimate& fit, double last_y, std::size_t horizon) {
    const double e = fit.state.residuals.empty() ? 0.0 : fit.state.residuals.back();
    return forecast(fit.params, last_y, e, horizon);
}

}  // namespace techcast::arima
