#include "evilab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "evilab/closed_form.hpp"
#include "evilab/error.hpp"
#include "evilab/optimize.hpp"
#include "evilab/parallel.hpp"

namespace evilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kConcavityTol = 1e-8;

/// Cost value, +infinity where the cost is undefined (e.g. KL against a vanishing weight).
double cost_or_inf(const CostFn& c, const Point& x, const Point& y) {
    try {
        return c(x, y);
    } catch (const DomainError&) {
        return kInf;
    }
}

struct ScanResult {
    std::size_t index = 0;
    double value = kInf;
    std::size_t ties = 0;
    bool found = false;
};

/// Lowest-index minimizer of values computed in parallel.
ScanResult scan_min(std::size_t n, const std::function<double(std::size_t)>& value_at) {
    std::vector<double> values(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) values[i] = value_at(i);
    });
    ScanResult r;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = values[i];
        if (!(v < kInf)) continue;
        if (!r.found || v < r.value) {
            r.found = true;
            r.value = v;
            r.index = i;
            r.ties = 0;
        } else if (v == r.value) {
            ++r.ties;
        }
    }
    return r;
}

const FiniteSpace& require_domain(const SolverSpec& solver, const char* who) {
    if (!solver.domain || solver.domain->empty())
        throw EmptySetError(std::string(who) + ": exhaustive solver has an empty search domain");
    return *solver.domain;
}

std::vector<double> coords(const Point& p) { return {p.values().begin(), p.values().end()}; }

void require_numeric_ok(const Point& p, const char* who) {
    if (p.kind() != PointKind::euclidean)
        throw ContractError(std::string(who) + ": numeric solver supports euclidean points only");
}

std::vector<double> first_gradient(const CostFn& c, const Point& x, const Point& y) {
    if (c.grad_first) return c.grad_first(x, y);
    return numeric_gradient([&](const Point& p) { return c(p, y); }, x);
}

std::vector<double> energy_gradient(const Energy& e, const Point& x) {
    if (e.gradient) return e.gradient(x);
    return numeric_gradient([&](const Point& p) { return e.at(p); }, x);
}

double fd_tolerance(const SolverSpec& solver, bool analytic) {
    // Central differences cannot resolve gradients much below 1e-7.
    return analytic ? solver.tolerance : std::max(solver.tolerance, 1e-7);
}

ArgminResult make_result(Point p, double value) {
    return ArgminResult{std::move(p), value, std::nullopt, 0, {}};
}

void note_ties(ArgminResult& r, const char* who) {
    if (r.ties == 0) return;
    std::ostringstream os;
    os << who << ": " << r.ties << " other grid points tie with the selected index " << *r.index;
    r.warnings.push_back(os.str());
}

}  // namespace

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::exhaustive: return "exhaustive";
        case SolverKind::closed_form: return "closed_form";
        case SolverKind::numeric: return "numeric";
    }
    return "unknown";
}

SolverKind parse_solver_kind(const std::string& name) {
    if (name == "exhaustive") return SolverKind::exhaustive;
    if (name == "closed_form") return SolverKind::closed_form;
    if (name == "numeric") return SolverKind::numeric;
    throw ConfigError("unknown solver kind '" + name + "'");
}

SolverSpec SolverSpec::exhaustive(FiniteSpace domain) {
    SolverSpec s;
    s.kind = SolverKind::exhaustive;
    s.domain = std::make_shared<const FiniteSpace>(std::move(domain));
    return s;
}

SolverSpec SolverSpec::closed_form() {
    SolverSpec s;
    s.kind = SolverKind::closed_form;
    return s;
}

SolverSpec SolverSpec::numeric(double tolerance, std::size_t max_evals) {
    SolverSpec s;
    s.kind = SolverKind::numeric;
    s.tolerance = tolerance;
    s.max_evals = max_evals;
    s.validate();
    return s;
}

void SolverSpec::validate() const {
    if (kind == SolverKind::numeric && !(tolerance > 0.0))
        throw DomainError("numeric solver tolerance must be positive");
    if (kind == SolverKind::exhaustive && (!domain || domain->empty()))
        throw EmptySetError("exhaustive solver needs a non-empty domain");
}

TransformResult c_transform(const Energy& f, const CostFn& c, double tau, const FiniteSpace& x_grid,
                            const FiniteSpace& y_grid) {
    if (!(tau > 0.0)) throw DomainError("c_transform needs tau > 0");
    if (x_grid.empty() || y_grid.empty()) throw EmptySetError("c_transform on an empty grid");
    std::vector<double> fx(x_grid.size());
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const ExtReal v = f(x_grid[i]);
        fx[i] = v.is_finite() ? v.value() : kInf;
    }
    TransformResult out;
    out.values.assign(y_grid.size(), -kInf);
    out.witness.assign(y_grid.size(), x_grid.size());
    parallel_for(y_grid.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
            for (std::size_t i = 0; i < x_grid.size(); ++i) {
                if (!(fx[i] < kInf)) continue;
                const double v = fx[i] - cost_or_inf(c, x_grid[i], y_grid[j]) / tau;
                if (v > out.values[j]) {
                    out.values[j] = v;
                    out.witness[j] = i;
                }
            }
        }
    });
    return out;
}

double c_transform_at(const Energy& f, const CostFn& c, double tau, const Point& y,
                      const SolverSpec& solver) {
    if (!(tau > 0.0)) throw DomainError("c_transform needs tau > 0");
    switch (solver.kind) {
        case SolverKind::exhaustive: {
            const FiniteSpace& dom = require_domain(solver, "c_transform");
            return c_transform(f, c, tau, dom, FiniteSpace({y})).values[0];
        }
        case SolverKind::closed_form:
            return ClosedFormRegistry::global()
                .require(StepKind::transform, f, c, tau)
                .value(f, c, tau, y);
        case SolverKind::numeric: {
            require_numeric_ok(y, "c_transform");
            const bool analytic = static_cast<bool>(f.gradient) && static_cast<bool>(c.grad_first);
            auto obj = [&](const std::vector<double>& x) {
                const Point p = Point::euclidean(x);
                if (!f.in_domain(p)) return kInf;
                return c(p, y) / tau - f.evaluate(p);
            };
            auto grad = [&](const std::vector<double>& x) {
                const Point p = Point::euclidean(x);
                std::vector<double> g = first_gradient(c, p, y);
                const std::vector<double> df = energy_gradient(f, p);
                for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] / tau - df[i];
                return g;
            };
            const MinimizeResult r = minimize_bfgs(obj, grad, coords(y), fd_tolerance(solver, analytic),
                                                   solver.max_evals);
            if (!r.converged)
                throw ConvergenceError("numeric c-transform ascent did not converge", r.gradient_norm);
            return -r.value;
        }
    }
    throw ContractError("unknown solver kind");
}

CheckReport check_c_concave(const Energy& f, const CostFn& c, double tau, const FiniteSpace& grid) {
    CheckReport r;
    r.check_name = "c_concave";
    r.tolerance = 1e-9;
    const TransformResult T = c_transform(f, c, tau, grid, grid);
    std::size_t skipped = 0;
    bool one_sided_broken = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const ExtReal fx = f(grid[i]);
        if (fx.is_infinite()) {
            ++skipped;
            continue;
        }
        double h = kInf;
        for (std::size_t j = 0; j < grid.size(); ++j)
            h = std::min(h, cost_or_inf(c, grid[i], grid[j]) / tau + T.values[j]);
        if (fx.value() > h + 1e-12) one_sided_broken = true;
        r.record(std::abs(fx.value() - h), Location{std::nullopt, std::nullopt, static_cast<long>(i), std::nullopt},
                 "|f(x) - min_y [c(x,y)/tau + f^c(y)]|");
    }
    if (skipped) r.notes.push_back(std::to_string(skipped) + " grid points outside dom(f) skipped");
    r.finalize();
    if (one_sided_broken) {
        r.notes.push_back("envelope inequality f <= c/tau + f^c broken; transform is inconsistent");
        r.verdict = Verdict::fail;
    }
    return r;
}

ArgminResult argmin_P(const Energy& g, const CostFn& c, double tau, const Point& y0,
                      const SolverSpec& solver) {
    if (!(tau > 0.0)) throw DomainError("argmin_P needs tau > 0");
    switch (solver.kind) {
        case SolverKind::exhaustive: {
            const FiniteSpace& dom = require_domain(solver, "argmin_P");
            const ScanResult s = scan_min(dom.size(), [&](std::size_t i) {
                const ExtReal gv = g(dom[i]);
                if (gv.is_infinite()) return kInf;
                return cost_or_inf(c, dom[i], y0) / tau + gv.value();
            });
            if (!s.found) throw EmptySetError("argmin_P: no grid point has a finite objective");
            ArgminResult r{dom[s.index], s.value, s.index, s.ties, {}};
            note_ties(r, "argmin_P");
            return r;
        }
        case SolverKind::closed_form: {
            const ClosedFormEntry& e =
                ClosedFormRegistry::global().require(StepKind::implicit_P, g, c, tau);
            Point x = e.solve(g, c, tau, y0);
            const double v = c(x, y0) / tau + g.at(x);
            return make_result(std::move(x), v);
        }
        case SolverKind::numeric: {
            require_numeric_ok(y0, "argmin_P");
            if (g.descriptor.box) throw ContractError("argmin_P: numeric solver does not handle box constraints");
            const bool analytic = static_cast<bool>(g.gradient) && static_cast<bool>(c.grad_first);
            auto obj = [&](const std::vector<double>& x) {
                const Point p = Point::euclidean(x);
                if (!g.in_domain(p)) return kInf;
                return c(p, y0) / tau + g.evaluate(p);
            };
            auto grad = [&](const std::vector<double>& x) {
                const Point p = Point::euclidean(x);
                std::vector<double> d = first_gradient(c, p, y0);
                const std::vector<double> dg = energy_gradient(g, p);
                for (std::size_t i = 0; i < d.size(); ++i) d[i] = d[i] / tau + dg[i];
                return d;
            };
            std::optional<double> floor;
            if (g.lower_bound) floor = *g.lower_bound - 1.0;
            const MinimizeResult m = minimize_bfgs(obj, grad, coords(y0), fd_tolerance(solver, analytic),
                                                   solver.max_evals, floor);
            if (m.unbounded) throw ConvergenceError("argmin_P: objective decreased below lower_bound - 1", m.value);
            if (!m.converged) throw ConvergenceError("argmin_P: numeric descent did not converge", m.gradient_norm);
            return make_result(Point::euclidean(m.x), m.value);
        }
    }
    throw ContractError("unknown solver kind");
}

ArgminResult argmin_Q(const Energy& f, const CostFn& c, double tau, const Point& x0,
                      const SolverSpec& solver, const FiniteSpace& y_grid,
                      const TransformResult* transform) {
    if (!(tau > 0.0)) throw DomainError("argmin_Q needs tau > 0");
    ArgminResult r = [&]() -> ArgminResult {
        switch (solver.kind) {
            case SolverKind::exhaustive: {
                if (y_grid.empty()) throw EmptySetError("argmin_Q: empty y grid");
                TransformResult local;
                if (!transform) {
                    local = c_transform(f, c, tau, require_domain(solver, "argmin_Q"), y_grid);
                    transform = &local;
                }
                if (transform->values.size() != y_grid.size())
                    throw ShapeError("argmin_Q: transform does not match the y grid");
                const ScanResult s = scan_min(y_grid.size(), [&](std::size_t j) {
                    const double t = transform->values[j];
                    if (!(t > -kInf)) return kInf;
                    return cost_or_inf(c, x0, y_grid[j]) / tau + t;
                });
                if (!s.found) throw EmptySetError("argmin_Q: no grid point has a finite objective");
                ArgminResult out{y_grid[s.index], s.value, s.index, s.ties, {}};
                note_ties(out, "argmin_Q");
                return out;
            }
            case SolverKind::closed_form: {
                auto& reg = ClosedFormRegistry::global();
                const ClosedFormEntry& e = reg.require(StepKind::explicit_Q, f, c, tau);
                const ClosedFormEntry& t = reg.require(StepKind::transform, f, c, tau);
                Point y = e.solve(f, c, tau, x0);
                const double v = c(x0, y) / tau + t.value(f, c, tau, y);
                return make_result(std::move(y), v);
            }
            case SolverKind::numeric: {
                require_numeric_ok(x0, "argmin_Q");
                // At an optimal y, x0 attains the sup in f^{c/tau}(y): grad_1 c(x0, y) = tau grad f(x0).
                const std::vector<double> target = [&] {
                    std::vector<double> g = energy_gradient(f, x0);
                    for (double& v : g) v *= tau;
                    return g;
                }();
                auto obj = [&](const std::vector<double>& y) {
                    const std::vector<double> d = first_gradient(c, x0, Point::euclidean(y));
                    double s = 0.0;
                    for (std::size_t i = 0; i < d.size(); ++i) s += (d[i] - target[i]) * (d[i] - target[i]);
                    return 0.5 * s;
                };
                const MinimizeResult m =
                    minimize_bfgs(obj, nullptr, coords(x0), 1e-14, solver.max_evals);
                const double residual = std::sqrt(2.0 * m.value);
                if (residual > fd_tolerance(solver, false))
                    throw ConvergenceError("argmin_Q: envelope equation not solved", residual);
                Point y = Point::euclidean(m.x);
                const double v = c(x0, y) / tau + c_transform_at(f, c, tau, y, solver);
                return make_result(std::move(y), v);
            }
        }
        throw ContractError("unknown solver kind");
    }();
    const ExtReal fx0 = f(x0);
    if (fx0.is_finite() && std::abs(r.value - fx0.value()) > kConcavityTol) {
        std::ostringstream os;
        os.precision(6);
        os << "argmin_Q: optimal value differs from f(x0) by " << std::abs(r.value - fx0.value())
           << " (f is not c/tau-concave at x0)";
        r.warnings.push_back(os.str());
    }
    return r;
}

ArgminResult argmin_R(const CostFn& c, const Point& x0, const SolverSpec& solver) {
    if (c.dissipative) return make_result(x0, c(x0, x0));
    switch (solver.kind) {
        case SolverKind::exhaustive: {
            const FiniteSpace& dom = require_domain(solver, "argmin_R");
            const ScanResult s = scan_min(dom.size(), [&](std::size_t i) { return cost_or_inf(c, x0, dom[i]); });
            if (!s.found) throw EmptySetError("argmin_R: no grid point has a finite cost");
            ArgminResult r{dom[s.index], s.value, s.index, s.ties, {}};
            note_ties(r, "argmin_R");
            return r;
        }
        case SolverKind::numeric: {
            require_numeric_ok(x0, "argmin_R");
            auto obj = [&](const std::vector<double>& y) { return c(x0, Point::euclidean(y)); };
            ObjectiveGradient grad;
            if (c.grad_second)
                grad = [&](const std::vector<double>& y) { return c.grad_second(x0, Point::euclidean(y)); };
            const MinimizeResult m = minimize_bfgs(obj, grad, coords(x0), fd_tolerance(solver, bool(grad)),
                                                   solver.max_evals);
            if (!m.converged) throw ConvergenceError("argmin_R: numeric descent did not converge", m.gradient_norm);
            return make_result(Point::euclidean(m.x), m.value);
        }
        case SolverKind::closed_form:
            throw ContractError("argmin_R: no closed form for non-dissipative costs");
    }
    throw ContractError("unknown solver kind");
}

ArgminResult member_S(const CostFn& c, const Point& x0, const SolverSpec& solver) {
    if (c.dissipative) return make_result(x0, c(x0, x0));
    switch (solver.kind) {
        case SolverKind::exhaustive: {
            const FiniteSpace& dom = require_domain(solver, "member_S");
            for (std::size_t k = 0; k < dom.size(); ++k) {
                const double at_x0 = cost_or_inf(c, x0, dom[k]);
                if (!(at_x0 < kInf)) continue;
                double m = kInf;
                for (std::size_t i = 0; i < dom.size(); ++i) m = std::min(m, cost_or_inf(c, dom[i], dom[k]));
                if (at_x0 <= m + 1e-12) return ArgminResult{dom[k], at_x0, k, 0, {}};
            }
            throw EmptySetError("member_S: no sampled xi has x0 among the minimizers of c(., xi)");
        }
        case SolverKind::numeric: {
            require_numeric_ok(x0, "member_S");
            auto obj = [&](const std::vector<double>& xi) {
                const std::vector<double> d = first_gradient(c, x0, Point::euclidean(xi));
                double s = 0.0;
                for (double v : d) s += v * v;
                return 0.5 * s;
            };
            const MinimizeResult m = minimize_bfgs(obj, nullptr, coords(x0), 1e-14, solver.max_evals);
            Point xi = Point::euclidean(m.x);
            const double at_x0 = c(x0, xi);
            auto inner = [&](const std::vector<double>& x) { return c(Point::euclidean(x), xi); };
            const MinimizeResult check = minimize_bfgs(inner, nullptr, coords(x0), 1e-9, solver.max_evals);
            if (std::sqrt(2.0 * m.value) > 1e-6 || check.value < at_x0 - 1e-8)
                throw EmptySetError("member_S: numeric search found no xi with x0 as minimizer");
            return make_result(std::move(xi), at_x0);
        }
        case SolverKind::closed_form:
            throw ContractError("member_S: no closed form for non-dissipative costs");
    }
    throw ContractError("unknown solver kind");
}

}  // namespace evilab
