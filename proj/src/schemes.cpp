#include "evilab/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

#include "evilab/error.hpp"
#include "evilab/parallel.hpp"

namespace evilab {

namespace {

constexpr double kEngineeringTol = 1e-8;

double default_tolerance(double slack) { return kEngineeringTol + 10.0 * slack; }

double slack_of(const SchemeSolvers& s, bool splitting) {
    double m = std::max(s.p.slack(), s.r.slack());
    if (splitting) m = std::max(m, s.q.slack());
    return m;
}

void absorb(SchemeRun& run, const ArgminResult& r, std::size_t step) {
    for (const auto& w : r.warnings) run.warnings.push_back("step " + std::to_string(step) + ": " + w);
}

void check_descent(SchemeRun& run) {
    const std::size_t n = run.records.size();
    if (n < 2) return;
    const double a = run.records[n - 2].phi, b = run.records[n - 1].phi;
    if (b > a + 1e-12 * (1.0 + std::abs(a)) + 10.0 * run.solver_slack) {
        std::ostringstream os;
        os.precision(17);
        os << "step " << n - 1 << ": phi increased from " << a << " to " << b;
        run.warnings.push_back(os.str());
    }
}

Location at(std::optional<long> level, std::optional<long> step, std::optional<long> test,
            std::optional<double> time) {
    return Location{level, step, test, time};
}

}  // namespace

std::string to_string(SchemeKind kind) {
    return kind == SchemeKind::implicit ? "implicit" : "splitting";
}

SchemeKind parse_scheme_kind(const std::string& name) {
    if (name == "implicit") return SchemeKind::implicit;
    if (name == "splitting") return SchemeKind::splitting;
    throw ConfigError("unknown scheme kind '" + name + "'");
}

Trajectory SchemeRun::trajectory() const { return Trajectory(tau, xs(), level); }

std::vector<Point> SchemeRun::xs() const {
    std::vector<Point> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.x);
    return out;
}

SchemeRun run_implicit(const Energy& g, const CostFn& c, double tau, const Point& x0,
                       std::size_t n_steps, const SchemeSolvers& solvers) {
    if (!(tau > 0.0)) throw DomainError("run_implicit needs tau > 0");
    if (g(x0).is_infinite()) throw DomainError("x0 is outside dom(g)");
    SchemeRun run;
    run.kind = SchemeKind::implicit;
    run.tau = tau;
    run.solver_slack = slack_of(solvers, false);
    run.records.reserve(n_steps + 1);
    Point x = x0;
    std::size_t i = 0;
    try {
        for (;; ++i) {
            const ArgminResult R = argmin_R(c, x, solvers.r);
            absorb(run, R, i);
            run.records.push_back(StepRecord{x, R.point, R.point, x, g.at(x)});
            check_descent(run);
            if (i == n_steps) break;
            const ArgminResult P = argmin_P(g, c, tau, R.point, solvers.p);
            absorb(run, P, i);
            x = P.point;
        }
    } catch (const Error& e) {
        run.failed_at = i;
        run.failure = e.what();
        spdlog::warn("implicit run (tau={}) stopped at step {}: {}", tau, i, e.what());
    }
    return run;
}

SchemeRun run_splitting(const SplitEnergy& se, const CostFn& c, double tau, const Point& x0,
                        std::size_t n_steps, const SchemeSolvers& solvers) {
    if (!(tau > 0.0)) throw DomainError("run_splitting needs tau > 0");
    if (!(tau < se.tau_bar)) throw DomainError("run_splitting needs tau < tau_bar");
    if (eval_phi(se, x0).is_infinite()) throw DomainError("x0 is outside dom(phi)");
    if (!c.dissipative) spdlog::warn("splitting scheme with a cost not claimed dissipative");

    SchemeRun run;
    run.kind = SchemeKind::splitting;
    run.tau = tau;
    run.solver_slack = slack_of(solvers, true);
    run.records.reserve(n_steps + 1);

    const FiniteSpace* y_grid = &solvers.y_grid;
    TransformResult transform;
    const TransformResult* cached = nullptr;
    if (solvers.q.kind == SolverKind::exhaustive) {
        if (y_grid->empty()) y_grid = solvers.q.domain.get();
        transform = c_transform(se.f, c, tau, *solvers.q.domain, *y_grid);
        cached = &transform;
    }

    Point x = x0;
    std::size_t i = 0;
    try {
        for (;; ++i) {
            const ArgminResult Z = argmin_R(c, x, solvers.r);
            const ArgminResult S = member_S(c, x, solvers.r);
            const ArgminResult Q = argmin_Q(se.f, c, tau, x, solvers.q, *y_grid, cached);
            absorb(run, Z, i);
            absorb(run, S, i);
            absorb(run, Q, i);
            run.records.push_back(StepRecord{x, Q.point, Z.point, S.point, eval_phi(se, x).value()});
            check_descent(run);
            if (i == n_steps) break;
            const ArgminResult P = argmin_P(se.g, c, tau, Q.point, solvers.p);
            absorb(run, P, i);
            x = P.point;
        }
    } catch (const Error& e) {
        run.failed_at = i;
        run.failure = e.what();
        spdlog::warn("splitting run (tau={}) stopped at step {}: {}", tau, i, e.what());
    }
    return run;
}

bool Ladder::complete() const {
    return std::all_of(runs.begin(), runs.end(), [](const SchemeRun& r) { return r.complete(); });
}

std::size_t steps_for(double horizon, double tau) {
    if (!(horizon > 0.0) || !(tau > 0.0)) throw DomainError("horizon and tau must be positive");
    return static_cast<std::size_t>(std::max(1.0, std::round(horizon / tau)));
}

double phi_of(const LadderSpec& spec, const Point& x) {
    if (spec.kind == SchemeKind::implicit) return spec.energy.g.at(x);
    return eval_phi(spec.energy, x).value();
}

SchemeRun run_level(const LadderSpec& spec, unsigned level) {
    const double tau = spec.tau / std::ldexp(1.0, static_cast<int>(level));
    const std::size_t n = steps_for(spec.horizon, spec.tau) << level;
    SchemeRun run = spec.kind == SchemeKind::implicit
                        ? run_implicit(spec.energy.g, spec.cost, tau, spec.x0, n, spec.solvers)
                        : run_splitting(spec.energy, spec.cost, tau, spec.x0, n, spec.solvers);
    run.level = level;
    return run;
}

Ladder dyadic_ladder(const LadderSpec& spec) {
    const double finest = spec.tau / std::ldexp(1.0, static_cast<int>(spec.depth));
    if (finest < 1e-6 * spec.horizon)
        throw DomainError("ladder too deep: tau / 2^P must be at least 1e-6 * T");
    Ladder ladder;
    ladder.coarse_steps = steps_for(spec.horizon, spec.tau);
    ladder.horizon = static_cast<double>(ladder.coarse_steps) * spec.tau;
    if (ladder.horizon != spec.horizon) {
        std::ostringstream os;
        os.precision(17);
        os << "horizon adjusted from " << spec.horizon << " to " << ladder.horizon << " (" << ladder.coarse_steps
           << " coarse steps)";
        ladder.notes.push_back(os.str());
        spdlog::info("{}", os.str());
    }
    LadderSpec adjusted = spec;
    adjusted.horizon = ladder.horizon;
    std::vector<SchemeRun> runs(spec.depth + 1);
    parallel_for(runs.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) runs[p] = run_level(adjusted, static_cast<unsigned>(p));
    });
    for (auto& r : runs) {
        const bool ok = r.complete();
        ladder.runs.push_back(std::move(r));
        if (!ok) {
            ladder.notes.push_back("level " + std::to_string(ladder.runs.back().level) +
                                   " failed: " + ladder.runs.back().failure);
            break;
        }
    }
    return ladder;
}

CheckReport cauchy_gap(const SchemeRun& coarse, const SchemeRun& fine, const CostFn& c,
                       const SplitEnergy& energy, const std::vector<double>& times,
                       std::optional<double> tolerance) {
    CheckReport r;
    r.check_name = "cauchy";
    r.tolerance = tolerance.value_or(default_tolerance(std::max(coarse.solver_slack, fine.solver_slack)));
    if (coarse.records.empty() || fine.records.empty()) throw ContractError("cauchy_gap on an empty run");
    if (!(coarse.records.front().x == fine.records.front().x))
        throw ContractError("cauchy_gap: runs do not share x0");
    const double tau = coarse.tau;
    const Trajectory tc = coarse.trajectory(), tf = fine.trajectory();
    if (coarse.kind == SchemeKind::implicit) {
        if (!c.decomposition)
            throw ContractError("cauchy_gap (implicit) needs a cost decomposition c = c1 + c2");
        const Energy& g = energy.g;
        const double g0 = g.at(coarse.records.front().x);
        for (double t : times) {
            const Point& xc = tc.interpolate(t);
            const Point& xf = tf.interpolate(t);
            const double lhs = c(xf, xc) + c(xc, xf);
            const double rhs = tau * (2.0 * g0 - g.at(xc) - g.at(xf));
            r.record(lhs - rhs, at(static_cast<long>(fine.level), static_cast<long>(step_index(t, tau)), std::nullopt, t),
                     "c(xf,xc) + c(xc,xf) - tau (2 g(x0) - g(xc) - g(xf))");
        }
    } else {
        if (!c.symmetric) throw ContractError("cauchy_gap (splitting) needs a symmetric cost");
        const double phi0 = coarse.records.front().phi;
        for (double t : times) {
            const std::size_t n = step_index(t, tau);
            if (n >= coarse.records.size()) throw HorizonError("cauchy_gap: time beyond the coarse run", coarse.trajectory().horizon());
            const StepRecord& rc = coarse.records[n];
            const double lhs = c(tf.interpolate(t), rc.z);
            const double rhs = tau * (phi0 - rc.phi);
            r.record(lhs - rhs, at(static_cast<long>(fine.level), static_cast<long>(n), std::nullopt, t),
                     "c(xf_t, z_n) - tau (phi(x0) - phi(x_n))");
        }
    }
    r.finalize();
    return r;
}

CheckReport ladder_cauchy(const Ladder& ladder, const CostFn& c, const SplitEnergy& energy,
                          std::optional<double> tolerance) {
    CheckReport total;
    total.check_name = "cauchy";
    if (ladder.runs.empty()) throw ContractError("ladder_cauchy on an empty ladder");
    const double tau0 = ladder.runs.front().tau;
    std::vector<double> times;
    for (std::size_t k = 0; k <= ladder.coarse_steps; ++k) times.push_back(static_cast<double>(k) * tau0);
    double slack = 0.0;
    for (const auto& run : ladder.runs) slack = std::max(slack, run.solver_slack);
    total.tolerance = tolerance.value_or(default_tolerance(slack));
    for (std::size_t p = 0; p < ladder.runs.size(); ++p) {
        for (std::size_t q = p + 1; q < ladder.runs.size(); ++q) {
            CheckReport pair = cauchy_gap(ladder.runs[p], ladder.runs[q], c, energy, times, total.tolerance);
            total.sweep_count += pair.sweep_count;
            if (pair.worst_residual > total.worst_residual) {
                total.worst_residual = pair.worst_residual;
                total.worst_location = pair.worst_location;
            }
            for (auto& v : pair.violations)
                if (total.violations.size() < 1000) total.violations.push_back(v);
            if (pair.verdict == Verdict::fail)
                total.notes.push_back("levels " + std::to_string(p) + " vs " + std::to_string(q) + " violate");
        }
    }
    if (!ladder.complete()) {
        total.notes.push_back("ladder incomplete; only finished levels compared");
        total.verdict = Verdict::inconclusive;
    }
    total.finalize();
    return total;
}

CheckReport error_vs_reference(const SchemeRun& run, const std::function<Point(double)>& reference,
                               const CostFn& c, double phi0, double phi_inf,
                               const std::vector<double>& times, double tolerance) {
    CheckReport r;
    r.check_name = "error_estimate";
    r.tolerance = tolerance;
    const double bound = 2.0 * run.tau * (phi0 - phi_inf);
    const Trajectory tr = run.trajectory();
    for (double t : times) {
        const double gap = c(tr.interpolate(t), reference(t));
        r.record(gap - bound, at(static_cast<long>(run.level), static_cast<long>(step_index(t, run.tau)), std::nullopt, t),
                 "c(x^tau_t, x_t) - 2 tau (phi(x0) - inf phi)");
    }
    r.finalize();
    return r;
}

CheckReport discrete_evi_residual(const SchemeRun& run, const CostFn& c, const SplitEnergy& energy,
                                  const FiniteSpace& test_points, std::optional<double> tolerance,
                                  std::vector<std::vector<double>>* heat) {
    CheckReport r;
    r.check_name = "discrete_evi";
    r.tolerance = tolerance.value_or(default_tolerance(run.solver_slack));
    const double tau = run.tau;
    const auto& rec = run.records;
    if (rec.size() < 2) throw ContractError("discrete_evi_residual needs at least one step");
    const std::size_t steps = rec.size() - 1;
    const std::size_t m = test_points.size();

    std::vector<char> usable(m);
    std::vector<double> phi_x(m), f_x(m);
    std::size_t skipped = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const ExtReal p = run.kind == SchemeKind::implicit ? energy.g(test_points[k]) : eval_phi(energy, test_points[k]);
        usable[k] = p.is_finite();
        if (!usable[k]) {
            ++skipped;
            continue;
        }
        phi_x[k] = p.value();
        if (run.kind == SchemeKind::splitting) f_x[k] = energy.f.at(test_points[k]);
    }

    // main[i*m+k], and for splitting the f-only inequality in aux.
    std::vector<double> main(steps * m, 0.0), aux(steps * m, 0.0);
    parallel_for(steps, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const StepRecord& a = rec[i];
            const StepRecord& n = rec[i + 1];
            for (std::size_t k = 0; k < m; ++k) {
                if (!usable[k]) continue;
                const Point& x = test_points[k];
                if (run.kind == SchemeKind::implicit) {
                    main[i * m + k] = (c(x, n.y) - c(x, a.y)) / tau + (c(n.x, a.y) - c(n.x, n.y)) / tau +
                                      energy.lambda_g * c(x, n.y) - phi_x[k] + n.phi;
                } else {
                    main[i * m + k] = (c(x, n.z) - c(x, a.z)) / tau + energy.lambda_f * c(x, a.z) +
                                      energy.lambda_g * c(x, n.z) - phi_x[k] + n.phi;
                    aux[i * m + k] = (c(x, a.y) - c(x, a.xi)) / tau + (c(a.x, a.xi) - c(n.x, a.y)) / tau +
                                     energy.lambda_f * (c(x, a.xi) - c(a.x, a.xi)) - f_x[k] +
                                     energy.f.at(n.x);
                }
            }
        }
    });
    if (heat) {
        heat->assign(steps, std::vector<double>(m, std::numeric_limits<double>::quiet_NaN()));
        for (std::size_t i = 0; i < steps; ++i)
            for (std::size_t k = 0; k < m; ++k)
                if (usable[k])
                    (*heat)[i][k] = run.kind == SchemeKind::implicit ? main[i * m + k]
                                                                     : std::max(main[i * m + k], aux[i * m + k]);
    }
    for (std::size_t i = 0; i < steps; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            if (!usable[k]) continue;
            const Location where = at(static_cast<long>(run.level), static_cast<long>(i), static_cast<long>(k),
                                      static_cast<double>(i) * tau);
            r.record(main[i * m + k], where, run.kind == SchemeKind::implicit ? "implicit discrete EVI" : "splitting discrete EVI");
            if (run.kind == SchemeKind::splitting) {
                r.record(aux[i * m + k], where, "f-only discrete EVI");
            }
        }
    }
    if (skipped) r.notes.push_back(std::to_string(skipped) + " test points outside dom(phi) skipped");
    if (!run.complete()) {
        r.notes.push_back("run stopped early at step " + std::to_string(*run.failed_at) + ": " + run.failure);
        r.verdict = Verdict::fail;
    }
    r.finalize();
    return r;
}

CheckReport monotone_energy(const SchemeRun& run) {
    CheckReport r;
    r.check_name = "monotone_energy";
    r.tolerance = 1e-12 + 10.0 * run.solver_slack;
    for (std::size_t i = 1; i < run.records.size(); ++i) {
        const double a = run.records[i - 1].phi, b = run.records[i].phi;
        r.record((b - a) / (1.0 + std::abs(a)), at(static_cast<long>(run.level), static_cast<long>(i), std::nullopt, std::nullopt),
                 "relative increase of phi");
    }
    r.finalize();
    return r;
}

}  // namespace evilab
