#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evilab/check_report.hpp"
#include "evilab/cost.hpp"
#include "evilab/energy.hpp"
#include "evilab/point.hpp"

namespace evilab {

enum class SolverKind { exhaustive, closed_form, numeric };

std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

/// How an argmin is found. Exhaustive scans break ties by lowest index.
struct SolverSpec {
    SolverKind kind = SolverKind::exhaustive;
    /// First-order residual target of the numeric kind.
    double tolerance = 1e-10;
    std::size_t max_evals = 100000;
    /// Search domain of the exhaustive kind.
    std::shared_ptr<const FiniteSpace> domain;

    static SolverSpec exhaustive(FiniteSpace domain);
    static SolverSpec closed_form();
    static SolverSpec numeric(double tolerance = 1e-10, std::size_t max_evals = 100000);

    void validate() const;
    /// Solver tolerance entering downstream residual tolerances (0 for exact kinds).
    double slack() const { return kind == SolverKind::numeric ? tolerance : 0.0; }
};

struct ArgminResult {
    Point point;
    double value = 0.0;
    /// Index into the search domain (exhaustive kind).
    std::optional<std::size_t> index;
    /// Number of other domain points attaining the same value exactly.
    std::size_t ties = 0;
    std::vector<std::string> warnings;
};

/// f^{c/tau}(y) = sup_x [f(x) - c(x,y)/tau] for every y in y_grid, sup over x_grid.
struct TransformResult {
    std::vector<double> values;
    std::vector<std::size_t> witness;
};

TransformResult c_transform(const Energy& f, const CostFn& c, double tau, const FiniteSpace& x_grid,
                            const FiniteSpace& y_grid);

/// f^{c/tau}(y) at a single point: exhaustive over solver.domain, closed form, or numeric ascent.
double c_transform_at(const Energy& f, const CostFn& c, double tau, const Point& y,
                      const SolverSpec& solver);

/// max_x |f(x) - min_y [c(x,y)/tau + f^{c/tau}(y)]| over the grid; pass iff <= 1e-9.
CheckReport check_c_concave(const Energy& f, const CostFn& c, double tau, const FiniteSpace& grid);

/// argmin_x c(x, y0)/tau + g(x).
ArgminResult argmin_P(const Energy& g, const CostFn& c, double tau, const Point& y0,
                      const SolverSpec& solver);

/// argmin_y c(x0, y)/tau + f^{c/tau}(y). The exhaustive kind scans y_grid with the transform
/// taken over solver.domain; pass a precomputed transform of y_grid to skip that work.
/// A value differing from f(x0) by more than 1e-8 adds a concavity warning.
ArgminResult argmin_Q(const Energy& f, const CostFn& c, double tau, const Point& x0,
                      const SolverSpec& solver, const FiniteSpace& y_grid,
                      const TransformResult* transform = nullptr);

/// argmin_y c(x0, y); x0 itself when c claims dissipativity.
ArgminResult argmin_R(const CostFn& c, const Point& x0, const SolverSpec& solver);

/// Some xi with x0 in argmin_x c(x, xi); x0 itself when c claims dissipativity.
/// Throws EmptySetError when no candidate verifies membership.
ArgminResult member_S(const CostFn& c, const Point& x0, const SolverSpec& solver);

}  // namespace evilab
