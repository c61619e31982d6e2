#include "techcast/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace techcast::optim {

SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, const std::vector<double>& steps,
                          const SimplexOptions& options) {
    const std::size_t n = x0.size();
    if (n == 0 || steps.size() != n) throw std::invalid_argument("nelder_mead: dimension mismatch");

    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];
    std::vector<double> fv(n + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n);
    std::vector<double> xr(n);
    std::vector<double> xe(n);
    std::vector<double> xc(n);
    const auto blend = [&](std::vector<double>& out, double a, const std::vector<double>& worst) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + a * (worst[j] - centroid[j]);
    };

    SimplexResult result;
    while (evals < options.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        double xspread = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j) xspread = std::max(xspread, std::abs(pts[i][j] - pts[best][j]));
        const double fspread = std::abs(fv[worst] - fv[best]);
        if (fspread <= options.f_tolerance * (std::abs(fv[best]) + 1e-300) && xspread <= options.x_tolerance) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
        }

        blend(xr, -1.0, pts[worst]);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            blend(xe, -2.0, pts[worst]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                fv[worst] = fe;
            } else {
                pts[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        // Outside contraction when the reflection beat the worst, inside otherwise.
        const bool outside = fr < fv[worst];
        blend(xc, outside ? -0.5 : 0.5, pts[worst]);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[worst])) {
            pts[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
            fv[i] = eval(pts[i]);
        }
    }

    const auto it = std::min_element(fv.begin(), fv.end());
    result.x = pts[static_cast<std::size_t>(it - fv.begin())];
    result.value = *it;
    result.evaluations = evals;
    return result;
}

}  // namespace techcast::optim
