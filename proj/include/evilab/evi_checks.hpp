#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evilab/check_report.hpp"
#include "evilab/cost.hpp"
#include "evilab/energy.hpp"
#include "evilab/trajectory.hpp"

namespace evilab {

/// Curve t -> x_t on [0, horizon].
struct ContinuousCurve {
    std::string source;
    std::function<Point(double)> at;
    double horizon = 0.0;
    /// Piecewise-constant step of a discrete interpolant (0 for smooth curves).
    double resolution = 0.0;

    Point operator()(double t) const;
};

ContinuousCurve curve_from_trajectory(const Trajectory& tr, std::string source);

/// Exact gradient flow of a preset energy for |x - y|^2 / 2 when known:
/// quadratic x0 e^{-kt}, linear x0 - tV, abs soft thresholding, zero x0.
std::optional<ContinuousCurve> closed_form_flow(const Energy& phi, const CostFn& c, const Point& x0,
                                                double horizon);

/// int_0^t e^{lambda r} dr.
double E_lambda(double lambda, double t);

/// Forward-difference limit estimate with an uncertainty channel.
struct Estimate {
    double value = 0.0;
    double uncertainty = 0.0;
    bool inconclusive = false;
    bool degenerate = false;
    std::string note;
};

/// Linear extrapolation to h = 0 from consecutive ladder pairs. The value is the last
/// extrapolant and the uncertainty the spread of the last two. Samples that do not vary
/// monotonically along the ladder mark the estimate inconclusive.
Estimate richardson(const std::vector<double>& h, const std::vector<double>& samples);

struct IntervalPair {
    double s;
    double t;
};

/// c(x,x_t) - c(x,x_s) + lambda int c(x,x_r) dr - (t-s) phi(x) + int phi(x_r) dr <= 0,
/// left-endpoint quadrature. Reported residuals are net of the per-entry tolerance
/// base (1 + |terms|) + h * (variation of the integrand).
CheckReport evi_integral_residual(const ContinuousCurve& curve, const CostFn& c, const Energy& phi,
                                  double lambda, const FiniteSpace& test_points,
                                  const std::vector<IntervalPair>& pairs, std::size_t quadrature_n,
                                  double base = 1e-6);

/// e^{lambda(t-s)} c(x,x_t) - c(x,x_s) - E_lambda(t-s) (phi(x) - phi(x_t)) <= tolerance.
CheckReport evi_exponential_residual(const ContinuousCurve& curve, const CostFn& c, const Energy& phi,
                                     double lambda, const FiniteSpace& test_points,
                                     const std::vector<IntervalPair>& pairs, double tolerance = 1e-9);

/// Extrapolated d+/dt c(x,x_t) + lambda c(x,x_t) - phi(x) + phi(x_t) <= max(floor, 3 uncertainty).
/// Reported residuals are net of that tolerance.
CheckReport evi_differential_residual(const ContinuousCurve& curve, const CostFn& c, const Energy& phi,
                                      double lambda, const FiniteSpace& test_points,
                                      const std::vector<double>& times, const std::vector<double>& h_ladder,
                                      double floor = 1e-3);

/// Lipschitz companion: c(x_s,x_t) <= E_{-lambda}(t-s) (phi(x_s) - phi(x_t)) for each pair.
CheckReport evi_lipschitz_bound(const ContinuousCurve& curve, const CostFn& c, const Energy& phi,
                                double lambda, const std::vector<IntervalPair>& pairs,
                                double tolerance = 1e-9);

/// e^{-2 lambda (t-s)} c(x_s, y_s) - c(x_t, y_t); needs a symmetric cost.
double lambda_contraction_gap(const ContinuousCurve& a, const ContinuousCurve& b, const CostFn& c,
                              double lambda, double s, double t);

/// e^{2 lambda (t-s)} c(x_t, y_t) / c(x_s, y_s); 1 for exactly contracting linear flows.
double contraction_ratio(const ContinuousCurve& a, const ContinuousCurve& b, const CostFn& c,
                         double lambda, double s, double t);

/// Contraction gaps for each pair; pass iff every gap >= -tolerance.
CheckReport lambda_contraction_check(const ContinuousCurve& a, const ContinuousCurve& b, const CostFn& c,
                                     double lambda, const std::vector<IntervalPair>& pairs,
                                     double tolerance = 1e-6);

/// lim 2 c(x_t, x_{t+h}) / h^2; inconclusive when the spread exceeds half the value.
Estimate c_cost_derivative(const ContinuousCurve& curve, const CostFn& c, double t,
                           const std::vector<double>& h_ladder);

/// (phi(x_t) - phi(x_{t+h}))^+ / sqrt(2 c(x_t, x_{t+h})): max of the two finest ladder values.
Estimate oriented_local_slope(const ContinuousCurve& curve, const Energy& phi, const CostFn& c, double t,
                              const std::vector<double>& h_ladder);

/// |d/dt phi(x_t) + |x'_t|_c^2| <= max(floor, 3 uncertainty) at each time (net residuals).
CheckReport energy_identity_gap(const ContinuousCurve& curve, const Energy& phi, const CostFn& c,
                                const std::vector<double>& times, const std::vector<double>& h_ladder,
                                double floor = 1e-3);

/// t -> e^{2 lambda t} |x'_t|_c^2 non-increasing on the time grid (net residuals).
CheckReport velocity_monotonicity(const ContinuousCurve& curve, const CostFn& c, double lambda,
                                  const std::vector<double>& times, const std::vector<double>& h_ladder,
                                  double floor = 1e-3);

/// e^{lambda(t-s)} c(x,x_t) - c(x,x_s) + E^2/2 |x'_t|^2 - E (phi(x) - phi(x_t)) with E = E_lambda(t-s);
/// pass iff <= tolerance + 3 uncertainty E^2 / 2 (net residuals).
CheckReport apriori_gap(const ContinuousCurve& curve, const CostFn& c, const Energy& phi, double lambda,
                        const FiniteSpace& test_points, const std::vector<IntervalPair>& pairs,
                        const std::vector<double>& h_ladder, double tolerance = 1e-9);

/// Long-time inequalities relative to a minimizer for lambda >= 0 (skipped for lambda < 0).
CheckReport asymptotic_report(const ContinuousCurve& curve, const Energy& phi, const CostFn& c, double lambda,
                              const Point& minimizer, double t0, const std::vector<double>& times,
                              const std::vector<double>& h_ladder, double tolerance = 1e-9,
                              double floor = 1e-3);

/// |grad_{2,1} c(x_t,x_t) x'_t - grad phi(x_t)| by central differences (euclidean only).
double local_stationarity_residual(const ContinuousCurve& curve, const CostFn& c, const Energy& phi, double t,
                                   double fd_step);

}  // namespace evilab
