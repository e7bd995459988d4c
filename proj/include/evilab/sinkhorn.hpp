#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "evilab/cost.hpp"
#include "evilab/point.hpp"

namespace evilab {

/// Row-major n x n matrix of ground costs between support atoms.
struct GroundCost {
    std::size_t n = 0;
    std::vector<double> values;

    double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
    double max_abs() const;
};

/// Ground costs c_X(s_i, s_j) for the given support coordinates.
GroundCost make_ground_cost(const std::vector<std::vector<double>>& support,
                            const std::function<double(const std::vector<double>&,
                                                       const std::vector<double>&)>& c_x);
/// Half squared euclidean distance between support coordinates.
GroundCost squared_euclidean_ground_cost(const std::vector<std::vector<double>>& support);

struct SinkhornConfig {
    double epsilon = 1.0;
    GroundCost ground_cost;
    std::size_t max_iters = 100000;
    double marginal_tol = 1e-10;

    /// Throws DomainError / ShapeError on invalid fields.
    void validate() const;
};

struct OtResult {
    double value = 0.0;
    std::size_t iterations = 0;
    double marginal_error = 0.0;
    /// Primal objective of the final coupling minus the dual value.
    double primal_dual_gap = 0.0;
};

/// Entropic transport cost min <C, pi> + eps KL(pi | mu x nu) by log-domain Sinkhorn.
/// Throws ConvergenceError when max_iters is reached.
OtResult ot_eps(const Point& mu, const Point& nu, const SinkhornConfig& cfg);

/// OT_eps(mu, nu) - OT_eps(mu, mu) / 2 - OT_eps(nu, nu) / 2.
double sinkhorn_divergence(const Point& mu, const Point& nu, const SinkhornConfig& cfg);

/// Sinkhorn divergence as a symmetric cost on densities over the configured support.
CostFn make_sinkhorn_cost(SinkhornConfig cfg);

}  // namespace evilab
