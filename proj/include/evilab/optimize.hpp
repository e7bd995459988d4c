#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace evilab {

using Objective = std::function<double(const std::vector<double>&)>;
using ObjectiveGradient = std::function<std::vector<double>(const std::vector<double>&)>;

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    double gradient_norm = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
    bool unbounded = false;
};

/// BFGS with backtracking Armijo line search. Stops when the gradient sup-norm is <= tolerance,
/// after max_evals objective evaluations, or when the value drops below stop_below.
/// Without an analytic gradient, central differences are used.
MinimizeResult minimize_bfgs(const Objective& fn, const ObjectiveGradient& grad,
                             std::vector<double> start, double tolerance, std::size_t max_evals,
                             std::optional<double> stop_below = std::nullopt);

}  // namespace evilab
