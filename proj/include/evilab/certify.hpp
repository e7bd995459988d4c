#pragma once

#include <functional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "evilab/check_report.hpp"
#include "evilab/cost.hpp"
#include "evilab/energy.hpp"
#include "evilab/point.hpp"
#include "evilab/transforms.hpp"

namespace evilab {

/// Curve t -> gamma(t) from x0 (t = 0) to x1 (t = 1).
struct SegmentProvider {
    std::string label;
    std::function<Point(const Point& x0, const Point& x1, double t)> generator;

    /// Returns x0 and x1 exactly at the endpoints.
    Point operator()(const Point& x0, const Point& x1, double t) const;
};

/// (1-t) x0 + t x1 on euclidean coordinates.
SegmentProvider linear_in_coordinates();
/// (1-t) x0 + t x1 on density weights.
SegmentProvider linear_in_weights();
/// Picks linear_in_weights for densities, linear_in_coordinates otherwise.
SegmentProvider default_segment(const Point& sample);

/// Inputs of a slack function M_t at one (instance, t).
struct SlackContext {
    double t = 0.0;
    /// c(x, y1) - c(x1, y1) on the concave side, c(x, xi0) - c(x0, xi0) on the convex side.
    double gap = 0.0;
    /// c(gamma_t, y1) - c(x1, y1) (concave) or c(gamma_t, xi0) - c(x0, xi0) (convex).
    double curve_gap = 0.0;
};

struct SlackFunction {
    std::string label = "zero";
    std::function<double(const SlackContext&)> eval;

    double operator()(const SlackContext& s) const { return eval ? eval(s) : 0.0; }
};

SlackFunction slack_zero();
/// scale * t^2 * gap.
SlackFunction slack_t_squared(double scale = 1.0);
/// max(1, lambda) t^p gap.
SlackFunction slack_ohta(double lambda, double p);
/// scale * curve_gap.
SlackFunction slack_curve_gap(double scale = 1.0);
/// "zero", "t2[:scale=s]", "ohta:lambda=l,p=p", "curve_gap[:scale=s]".
SlackFunction parse_slack(const std::string& label);

/// Strong c/tau-cross-concavity of -g, swept over (y0, x) in domain x domain.
/// P and R are solved with the given specs (exhaustive over domain by default).
CheckReport check_cross_concave(const Energy& g, const CostFn& c, double tau, double mu,
                                const FiniteSpace& domain, const SolverSpec& p_solver,
                                const SolverSpec& r_solver);
CheckReport check_cross_concave(const Energy& g, const CostFn& c, double tau, double mu,
                                const FiniteSpace& domain);

/// Strong c/tau-cross-convexity of f, swept over (x0, x) in domain x domain.
CheckReport check_cross_convex(const Energy& f, const CostFn& c, double tau, double mu,
                               const FiniteSpace& domain, const SolverSpec& q_solver,
                               const SolverSpec& s_solver);
CheckReport check_cross_convex(const Energy& f, const CostFn& c, double tau, double mu,
                               const FiniteSpace& domain);

struct ConcaveTriple {
    Point y0;
    Point x1;
    Point x;
};

/// Both compatibility inequalities of the concave side along gamma from x1 to x, y1 in R_c(x1).
CheckReport check_compat_concave(const Energy& g, const CostFn& c, double lambda,
                                 const SegmentProvider& segment, const SlackFunction& M,
                                 const std::vector<ConcaveTriple>& triples, const std::vector<double>& t_grid,
                                 const SolverSpec& r_solver, double tolerance = 1e-10);

/// Both compatibility inequalities of the convex side along gamma from x0 to x, with
/// z(t) in Q_{c/tau}(f, gamma(t)) and the coupling defect f(gamma) - f^{c/tau}(z) - c(gamma, z)/tau.
CheckReport check_compat_convex(const Energy& f, const CostFn& c, double tau, double lambda,
                                const SegmentProvider& segment, const SlackFunction& M,
                                const std::vector<std::pair<Point, Point>>& pairs,
                                const std::vector<double>& t_grid, const SolverSpec& q_solver,
                                const SolverSpec& s_solver, const FiniteSpace& y_grid,
                                double tolerance = 1e-10);

/// Residual table of check_nncc_segment, rows t_grid, columns y_grid.
std::vector<std::vector<double>> nncc_table(const CostFn& c, const SegmentProvider& gamma, const Point& x0,
                                            const Point& x1, const Point& ybar, const FiniteSpace& y_grid,
                                            const std::vector<double>& t_grid);

/// c(g_s, ybar) - c(g_s, y) - (1-s)[c(x0,ybar) - c(x0,y)] - s[c(x1,ybar) - c(x1,y)] over y_grid x t_grid.
CheckReport check_nncc_segment(const CostFn& c, const SegmentProvider& gamma, const Point& x0, const Point& x1,
                               const Point& ybar, const FiniteSpace& y_grid, const std::vector<double>& t_grid,
                               double tolerance = 1e-9);

/// phi(g_t) - (1-t) phi(x0) - t phi(x) + lambda t c(x, x0) - M(t).
CheckReport check_semiconvex_along_segment(const Energy& phi, const CostFn& c, double lambda,
                                           const SegmentProvider& gamma, const Point& x0, const Point& x,
                                           const std::vector<double>& t_grid,
                                           const std::function<double(double)>& M, double tolerance = 1e-10);

using MetricFn = std::function<double(const Point&, const Point&)>;

/// Grid midpoint quality of d at level n: min_y [d^2(x,y) + d^2(x',y)] - d^2(x,x')/2 against
/// 2 (d/2 + eps)^2 - d^2/2, with d scaled by 2^{-(n-1)/2}.
CheckReport midpoint_concavity_check(const MetricFn& d, const FiniteSpace& grid, unsigned n, double eps);

/// Fails where `compat` passed but `cross` did not.
CheckReport lemma_consistency(const CheckReport& compat, const CheckReport& cross);

/// t grid on [0,1] with `count` uniform points plus {1e-4, 1e-3, 1e-2}.
std::vector<double> default_t_grid(std::size_t count = 11);

}  // namespace evilab
