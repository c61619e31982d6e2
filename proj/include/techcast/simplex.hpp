#pragma once

#include <functional>
#include <vector>

namespace techcast::optim {

struct SimplexOptions {
    int max_evaluations = 5000;
    /// Stop once the simplex f-values agree to this relative spread and the
    /// vertices to x_tolerance.
    double f_tolerance = 1e-12;
    double x_tolerance = 1e-9;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Nelder-Mead with standard coefficients (reflect 1, expand 2, contract 1/2,
/// shrink 1/2). `steps` gives the initial simplex edge per coordinate.
SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, const std::vector<double>& steps,
                          const SimplexOptions& options = {});

}  // namespace techcast::optim
