#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evilab/check_report.hpp"
#include "evilab/extended_real.hpp"
#include "evilab/point.hpp"

namespace evilab {

using CostEvaluator = std::function<double(const Point&, const Point&)>;
/// Gradient of a cost with respect to one argument (euclidean points only).
using CostGradient = std::function<std::vector<double>(const Point&, const Point&)>;

/// c = c1 + c2 with c1 symmetric and non-negative, c2 satisfying the triangle inequality.
struct CostDecomposition {
    CostEvaluator c1;
    CostEvaluator c2;
};

/// Cost c(x, y) with the claims made about it. Claims are checked by check_dissipative,
/// never assumed by the checks that depend on them.
struct CostFn {
    std::string label;
    CostEvaluator evaluate;
    bool symmetric = false;
    bool dissipative = false;
    std::optional<CostDecomposition> decomposition;
    /// d/dx c(x, y) and d/dy c(x, y), when known in closed form.
    CostGradient grad_first;
    CostGradient grad_second;

    double operator()(const Point& x, const Point& y) const { return evaluate(x, y); }
};

/// ||x - y||^2 / 2, symmetric, dissipative, decomposition (c, 0).
CostFn make_squared_euclidean();
/// ||x - y||^p for p >= 1.
CostFn make_power_distance(double p);

using Potential = std::function<double(const Point&)>;
using PotentialGradient = std::function<std::vector<double>(const Point&)>;

/// Bregman divergence u(x) - u(y) - <u'(y), x - y> on euclidean or density points.
CostFn make_bregman(std::string label, Potential u, PotentialGradient u_grad);
/// Bregman divergence of u(x) = ||x||^2 / 2.
CostFn make_bregman_quadratic();
/// Bregman divergence of the negative entropy sum x_i ln x_i (densities).
CostFn make_bregman_entropy();

/// sum_i mu_i ln(mu_i / nu_i) with 0 ln(0/q) = 0; +infinity when nu_i = 0 < mu_i.
ExtReal kl_divergence(const Point& mu, const Point& nu);
/// KL as a cost; throws DomainError where KL is infinite.
CostFn make_kl();

/// Total variation distance, half the L1 norm.
double total_variation(const Point& mu, const Point& nu);
/// KL(mu|nu) - 2 TV(mu, nu)^2.
double pinsker_gap(const Point& mu, const Point& nu);

/// c(x,x) <= 1e-10, c(x,y) >= -1e-10 and min_{x != y} c(x,y) > 0 over the sample.
CheckReport check_dissipative(const CostFn& c, const FiniteSpace& sample);

struct RegularityModulus {
    double value = 0.0;
    bool no_qualifying_triple = false;
    std::size_t qualifying_triples = 0;
};

/// Empirical sup{ c(x,y) : exists p, c(p,x) <= r1, c(p,y) <= r2 } over sample triples.
RegularityModulus regularity_modulus(const CostFn& c, const FiniteSpace& sample, double r1, double r2);

}  // namespace evilab
