#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "evilab/check_report.hpp"
#include "evilab/cost.hpp"
#include "evilab/energy.hpp"
#include "evilab/trajectory.hpp"
#include "evilab/transforms.hpp"

namespace evilab {

enum class SchemeKind { implicit, splitting };

std::string to_string(SchemeKind kind);
SchemeKind parse_scheme_kind(const std::string& name);

/// One iterate: x_i, y_i (R or Q step), z_i in R_c(x_i), xi_i in S_c(x_i), phi(x_i).
struct StepRecord {
    Point x;
    Point y;
    Point z;
    Point xi;
    double phi = 0.0;
};

struct SchemeRun {
    SchemeKind kind = SchemeKind::implicit;
    double tau = 0.0;
    unsigned level = 0;
    std::vector<StepRecord> records;
    /// Step at which an inner solver failed; records stop there.
    std::optional<std::size_t> failed_at;
    std::string failure;
    std::vector<std::string> warnings;
    /// Largest solver tolerance used (0 for exact solvers).
    double solver_slack = 0.0;

    bool complete() const { return !failed_at.has_value(); }
    Trajectory trajectory() const;
    std::vector<Point> xs() const;
};

/// Solvers for the two half steps. y_grid is the search grid of the exhaustive Q step.
struct SchemeSolvers {
    SolverSpec p = SolverSpec::closed_form();
    SolverSpec q = SolverSpec::closed_form();
    SolverSpec r = SolverSpec::closed_form();
    FiniteSpace y_grid;
};

/// x_0, y_i in R_c(x_i), x_{i+1} in P_{c/tau}(-g, y_i).
SchemeRun run_implicit(const Energy& g, const CostFn& c, double tau, const Point& x0,
                       std::size_t n_steps, const SchemeSolvers& solvers);

/// y_i in Q_{c/tau}(f, x_i), x_{i+1} in P_{c/tau}(-g, y_i), xi_i in S_c(x_i), z_i in R_c(x_i).
SchemeRun run_splitting(const SplitEnergy& se, const CostFn& c, double tau, const Point& x0,
                        std::size_t n_steps, const SchemeSolvers& solvers);

struct LadderSpec {
    SchemeKind kind = SchemeKind::implicit;
    SplitEnergy energy;
    CostFn cost;
    double tau = 0.1;
    Point x0 = Point::euclidean({0.0});
    double horizon = 1.0;
    unsigned depth = 0;
    SchemeSolvers solvers;
};

struct Ladder {
    std::vector<SchemeRun> runs;
    /// Horizon after rounding to a whole number of coarse steps.
    double horizon = 0.0;
    std::size_t coarse_steps = 0;
    std::vector<std::string> notes;

    bool complete() const;
};

/// Number of steps round(T / tau).
std::size_t steps_for(double horizon, double tau);

/// Runs at tau / 2^p for p = 0..depth over a common horizon; levels run concurrently.
/// A failed level stops the ladder there, keeping the finished levels.
Ladder dyadic_ladder(const LadderSpec& spec);

/// Runs one level of the ladder spec at tau / 2^level with steps_for(horizon) * 2^level steps.
SchemeRun run_level(const LadderSpec& spec, unsigned level);

/// Phi of a run's energy at a point (g for implicit runs, f + g for splitting runs).
double phi_of(const LadderSpec& spec, const Point& x);

/// Cauchy estimate between a coarse and a finer run at times that are multiples of the coarse tau.
/// Implicit: c(xf,xc) + c(xc,xf) <= tau (2 g(x0) - g(xc) - g(xf)); needs a cost decomposition.
/// Splitting: c(xf_t, z^tau_n) <= tau (phi(x0) - phi(x^tau_n)); needs a symmetric cost.
/// Default tolerance 1e-8 + 10 * solver slack.
CheckReport cauchy_gap(const SchemeRun& coarse, const SchemeRun& fine, const CostFn& c,
                       const SplitEnergy& energy, const std::vector<double>& times,
                       std::optional<double> tolerance = std::nullopt);

/// Cauchy estimate for every level pair (p < q) at all multiples of the level-0 tau.
CheckReport ladder_cauchy(const Ladder& ladder, const CostFn& c, const SplitEnergy& energy,
                          std::optional<double> tolerance = std::nullopt);

/// c(x^tau_t, x_t) <= 2 tau (phi0 - phi_inf) at the given times.
CheckReport error_vs_reference(const SchemeRun& run, const std::function<Point(double)>& reference,
                               const CostFn& c, double phi0, double phi_inf,
                               const std::vector<double>& times, double tolerance = 1e-8);

/// Discrete EVI residuals for every step and test point.
/// Implicit: [c(x,y_{i+1}) - c(x,y_i)]/tau + [c(x_{i+1},y_i) - c(x_{i+1},y_{i+1})]/tau
///           + lambda_g c(x,y_{i+1}) - g(x) + g(x_{i+1}) <= 0.
/// Splitting: [c(x,z_{i+1}) - c(x,z_i)]/tau + lambda_f c(x,z_i) + lambda_g c(x,z_{i+1})
///           - phi(x) + phi(x_{i+1}) <= 0, plus the f-only inequality using xi_i.
/// When `heat` is given it receives the residual table (steps x test points; the larger of the
/// two inequalities for splitting, NaN for skipped test points).
CheckReport discrete_evi_residual(const SchemeRun& run, const CostFn& c, const SplitEnergy& energy,
                                  const FiniteSpace& test_points,
                                  std::optional<double> tolerance = std::nullopt,
                                  std::vector<std::vector<double>>* heat = nullptr);

/// phi(x_{i+1}) <= phi(x_i) up to the solver slack.
CheckReport monotone_energy(const SchemeRun& run);

}  // namespace evilab
