#include "evilab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "evilab/certify.hpp"
#include "evilab/cost.hpp"
#include "evilab/error.hpp"
#include "evilab/sinkhorn.hpp"

namespace evilab {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double param(const EnergySpec& e, const std::string& key, double fallback) {
    auto it = e.params.find(key);
    return it == e.params.end() ? fallback : it->second;
}

void only_params(const EnergySpec& e, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : e.params)
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
            throw ConfigError("energy '" + e.name + "' has no parameter '" + k + "'");
}

std::optional<DensityBounds> space_bounds(const ExperimentConfig& cfg) {
    if (cfg.space.kind != "density" || !cfg.space.bounds) return std::nullopt;
    DensityBounds b;
    b.reference = cfg.space.reference;
    if (b.reference.empty()) b.reference.assign(cfg.space.atoms, 1.0 / static_cast<double>(cfg.space.atoms));
    b.a = cfg.space.bounds->first;
    b.b = cfg.space.bounds->second;
    return b;
}

std::size_t space_dim(const ExperimentConfig& cfg) {
    return cfg.space.kind == "density" ? cfg.space.atoms : cfg.space.dim;
}

const std::set<std::string>& certificate_checks() {
    static const std::set<std::string> s{"cross_concave", "cross_convex", "compat_concave", "compat_convex",
                                         "nncc_segment", "c_concave"};
    return s;
}

// Every k-th element so that at most `cap` remain.
template <class T>
std::vector<T> thin(const std::vector<T>& v, std::size_t cap) {
    if (v.size() <= cap) return v;
    std::vector<T> out;
    const double stride = static_cast<double>(v.size()) / static_cast<double>(cap);
    for (std::size_t k = 0; k < cap; ++k) out.push_back(v[static_cast<std::size_t>(std::floor(k * stride))]);
    return out;
}

// Merges `part` into `total` as one sweep with a common tolerance.
void absorb(CheckReport& total, const CheckReport& part, const std::string& prefix) {
    total.sweep_count += part.sweep_count;
    if (part.worst_residual > total.worst_residual || std::isnan(part.worst_residual)) {
        total.worst_residual = part.worst_residual;
        total.worst_location = part.worst_location;
    }
    for (const auto& v : part.violations) {
        if (total.violations.size() >= 1000) break;
        Violation w = v;
        w.detail = prefix + w.detail;
        total.violations.push_back(std::move(w));
    }
    for (const auto& n : part.notes) total.notes.push_back(prefix + n);
    total.verdict = worst(total.verdict, part.verdict);
}

class Runner {
public:
    Runner(const ExperimentConfig& cfg, RunOptions opt) : cfg_(cfg), opt_(opt), cost_(resolve_cost(cfg)) {}

    CheckReport run_check(const std::string& name, Artifacts& art) {
        const auto start = std::chrono::steady_clock::now();
        CheckReport r;
        try {
            r = dispatch(name, art);
        } catch (const Error& e) {
            r = CheckReport{};
            r.verdict = Verdict::fail;
            r.worst_residual = std::numeric_limits<double>::quiet_NaN();
            r.notes.push_back(std::string("error: ") + e.what());
            spdlog::error("check {} raised: {}", name, e.what());
        }
        r.check_name = name;
        r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return r;
    }

    const CostFn& cost() const { return cost_; }

    const SchemeRun& base_run(Artifacts& art) {
        if (!base_) {
            const LadderSpec spec = ladder_spec(cfg_);
            base_ = run_level(spec, 0);
            if (!have_ladder_) art.runs = {*base_};
        }
        return *base_;
    }

    const Ladder& ladder(Artifacts& art) {
        if (!ladder_) {
            ladder_ = dyadic_ladder(ladder_spec(cfg_));
            art.runs = ladder_->runs;
            have_ladder_ = true;
        }
        return *ladder_;
    }

    const ContinuousCurve& reference(Artifacts& art) {
        if (!reference_) {
            reference_ = reference_oracle(cfg_);
            art.reference = reference_;
        }
        return *reference_;
    }

    std::string reference_source() const { return reference_ ? reference_->source : ""; }

private:
    double eng() const { return opt_.strict_tolerances ? 0.0 : 1e-8; }

    double tol(const std::string& name, double dflt) const {
        auto it = cfg_.tolerances.find(name);
        return it != cfg_.tolerances.end() ? it->second : dflt;
    }

    double lambda() const { return cfg_.check_params.lambda.value_or(cfg_.lambda_f + cfg_.lambda_g); }

    SolverSpec cert_solver() const {
        if (cfg_.solver == SolverKind::exhaustive) return SolverSpec::exhaustive(search_domain(cfg_));
        if (cfg_.solver == SolverKind::numeric) return SolverSpec::numeric(cfg_.solver_tolerance);
        return SolverSpec::closed_form();
    }

    // Overrides the verdict threshold of checks that take no tolerance argument.
    void override_tolerance(CheckReport& r, const std::string& name) const {
        auto it = cfg_.tolerances.find(name);
        if (it == cfg_.tolerances.end()) return;
        r.tolerance = it->second;
        if (r.verdict != Verdict::inconclusive && std::isfinite(r.worst_residual))
            r.verdict = r.worst_residual <= r.tolerance ? Verdict::pass : Verdict::fail;
        r.notes.push_back("tolerance overridden by configuration");
    }

    CheckReport dispatch(const std::string& name, Artifacts& art) {
        const auto& p = cfg_.check_params;
        const SplitEnergy se = resolve_split(cfg_);
        const Energy phi = flow_energy(cfg_);
        const double slack = cfg_.solver == SolverKind::numeric ? cfg_.solver_tolerance : 0.0;

        if (name == "error_estimate") {
            if (cfg_.scheme != SchemeKind::implicit) throw ContractError("error_estimate applies to implicit runs");
            const ContinuousCurve& ref = reference(art);
            const double phi0 = phi.at(make_point(cfg_, cfg_.x0));
            double phi_inf = 0.0;
            if (p.phi_inf) phi_inf = *p.phi_inf;
            else if (!p.minimizer.empty()) phi_inf = phi.at(make_point(cfg_, p.minimizer));
            else if (phi.lower_bound) phi_inf = *phi.lower_bound;
            else throw ContractError("error_estimate needs check_params.phi_inf or a minimizer");
            CheckReport total;
            total.tolerance = tol(name, eng());
            const std::vector<double> taus = p.error_taus.empty() ? std::vector<double>{cfg_.tau} : p.error_taus;
            const SchemeSolvers solvers = scheme_solvers(cfg_);
            for (double tau : taus) {
                const SchemeRun run = run_implicit(se.g, cost_, tau, make_point(cfg_, cfg_.x0),
                                                   steps_for(cfg_.horizon, tau), solvers);
                const double T = tau * static_cast<double>(run.records.size() - 1);
                const auto times = checkpoint_grid(std::min(T, cfg_.horizon), p.checkpoints);
                const CheckReport part = error_vs_reference(run, ref, cost_, phi0, phi_inf, times, total.tolerance);
                std::ostringstream os;
                os << "tau=" << num(tau) << ": ";
                absorb(total, part, os.str());
                if (1.0 <= T) {
                    std::ostringstream g;
                    g << "tau=" << num(tau) << ": c(x^tau_1, x_1) = " << num(cost_(run.trajectory().interpolate(1.0), ref(1.0)))
                      << ", bound 2 tau (phi0 - phi_inf) = " << num(2.0 * tau * (phi0 - phi_inf));
                    total.notes.push_back(g.str());
                }
            }
            total.finalize();
            return total;
        }
        if (name == "cauchy") {
            const Ladder& L = ladder(art);
            CheckReport r = ladder_cauchy(L, cost_, se, tol(name, eng() + 10.0 * slack));
            for (const auto& n : L.notes) r.notes.push_back(n);
            return r;
        }
        if (name == "discrete_evi") {
            const SchemeRun& run = base_run(art);
            return discrete_evi_residual(run, cost_, se, test_points(cfg_), tol(name, eng() + 10.0 * slack),
                                         &art.residual_heat);
        }
        if (name == "monotone_energy") {
            CheckReport r = monotone_energy(base_run(art));
            override_tolerance(r, name);
            return r;
        }
        if (name == "evi_integral")
            return evi_integral_residual(reference(art), cost_, phi, lambda(), test_points(cfg_), p.pairs,
                                         p.quadrature_n, tol(name, opt_.strict_tolerances ? 0.0 : 1e-6));
        if (name == "evi_exponential")
            return evi_exponential_residual(reference(art), cost_, phi, lambda(), test_points(cfg_), p.pairs,
                                            tol(name, opt_.strict_tolerances ? 0.0 : 1e-9));
        if (name == "evi_differential")
            return evi_differential_residual(reference(art), cost_, phi, lambda(), test_points(cfg_), p.times,
                                             p.h_ladder, tol(name, p.derivative_floor));
        if (name == "evi_lipschitz")
            return evi_lipschitz_bound(reference(art), cost_, phi, lambda(), p.pairs, tol(name, eng()));
        if (name == "lambda_contraction") {
            if (p.contraction_x0.empty()) throw ContractError("lambda_contraction needs check_params.contraction_x0");
            const ContinuousCurve other = reference_oracle(cfg_, p.contraction_x0);
            CheckReport r = lambda_contraction_check(reference(art), other, cost_, lambda(), p.pairs,
                                                     tol(name, opt_.strict_tolerances ? 0.0 : 1e-6));
            double dev = 0.0;
            for (const auto& pr : p.pairs)
                dev = std::max(dev, std::abs(contraction_ratio(reference(art), other, cost_, lambda(), pr.s, pr.t) - 1.0));
            r.notes.push_back("max |e^{2 lambda (t-s)} c_t / c_s - 1| = " + num(dev));
            return r;
        }
        if (name == "energy_identity")
            return energy_identity_gap(reference(art), phi, cost_, p.times, p.h_ladder, tol(name, p.derivative_floor));
        if (name == "velocity_monotonicity")
            return velocity_monotonicity(reference(art), cost_, lambda(), p.times, p.h_ladder,
                                         tol(name, p.derivative_floor));
        if (name == "apriori")
            return apriori_gap(reference(art), cost_, phi, lambda(), test_points(cfg_), p.pairs, p.h_ladder,
                               tol(name, std::max(eng(), p.derivative_floor)));
        if (name == "asymptotic") {
            if (p.minimizer.empty()) throw ContractError("asymptotic needs check_params.minimizer");
            return asymptotic_report(reference(art), phi, cost_, lambda(), make_point(cfg_, p.minimizer), p.t0,
                                     p.times, p.h_ladder, tol(name, opt_.strict_tolerances ? 0.0 : 1e-10),
                                     p.derivative_floor);
        }

        const double ctau = p.cert_tau.value_or(cfg_.tau);
        const FiniteSpace domain = search_domain(cfg_);
        if (name == "cross_concave") {
            const SolverSpec s = cert_solver();
            CheckReport r = check_cross_concave(se.g, cost_, ctau, p.mu.value_or(cfg_.lambda_g * ctau), domain, s, s);
            override_tolerance(r, name);
            return r;
        }
        if (name == "cross_convex") {
            const SolverSpec s = cert_solver();
            CheckReport r = check_cross_convex(se.f, cost_, ctau, p.mu.value_or(cfg_.lambda_f * ctau), domain, s, s);
            override_tolerance(r, name);
            return r;
        }
        if (name == "compat_concave") {
            std::vector<ConcaveTriple> triples;
            const auto pts = thin(domain.points(), static_cast<std::size_t>(std::cbrt(static_cast<double>(p.max_instances))) + 1);
            for (const auto& y0 : pts)
                for (const auto& x1 : pts)
                    for (const auto& x : pts) triples.push_back({y0, x1, x});
            triples = thin(triples, p.max_instances);
            return check_compat_concave(se.g, cost_, cfg_.lambda_g, default_segment(domain[0]), parse_slack(p.slack),
                                        triples, default_t_grid(p.t_grid), cert_solver(), tol(name, 1e-10));
        }
        if (name == "compat_convex") {
            std::vector<std::pair<Point, Point>> pairs;
            const auto pts = thin(domain.points(), static_cast<std::size_t>(std::sqrt(static_cast<double>(p.max_instances))) + 1);
            for (const auto& a : pts)
                for (const auto& b : pts) pairs.emplace_back(a, b);
            pairs = thin(pairs, p.max_instances);
            const SolverSpec s = cert_solver();
            return check_compat_convex(se.f, cost_, ctau, cfg_.lambda_f, default_segment(domain[0]), parse_slack(p.slack),
                                       pairs, default_t_grid(p.t_grid), s, s, domain, tol(name, 1e-10));
        }
        if (name == "nncc_segment") {
            const std::size_t n = domain.size();
            return check_nncc_segment(cost_, default_segment(domain[0]), domain[n / 4], domain[(3 * n) / 4],
                                      domain[n / 2], domain, default_t_grid(p.t_grid), tol(name, 1e-9));
        }
        if (name == "c_concave") {
            CheckReport r = check_c_concave(se.f, cost_, ctau, domain);
            art.transform = c_transform(se.f, cost_, ctau, domain, domain);
            override_tolerance(r, name);
            return r;
        }
        throw ConfigError("unknown check '" + name + "'");
    }

    const ExperimentConfig& cfg_;
    RunOptions opt_;
    CostFn cost_;
    std::optional<SchemeRun> base_;
    std::optional<Ladder> ladder_;
    bool have_ladder_ = false;
    std::optional<ContinuousCurve> reference_;
};

}  // namespace

std::string to_string(Command c) {
    switch (c) {
        case Command::run: return "run";
        case Command::ladder: return "ladder";
        case Command::certify: return "certify";
        case Command::transform: return "transform";
    }
    return "run";
}

CostFn resolve_cost(const ExperimentConfig& cfg) {
    const Label label = parse_label(cfg.cost);
    const std::string& name = label.name;
    const auto& params = label.scalars;
    if (!label.vectors.empty()) throw ConfigError("cost '" + cfg.cost + "' takes no list parameters");
    auto get = [&](const std::string& k) {
        auto it = params.find(k);
        if (it == params.end()) throw ConfigError("cost '" + cfg.cost + "' needs parameter " + k);
        return it->second;
    };
    auto no_params = [&] {
        if (!params.empty()) throw ConfigError("cost '" + name + "' takes no parameters");
    };
    const bool density = cfg.space.kind == "density";
    if (name == "sq_euclid") {
        no_params();
        if (density) throw ConfigError("cost sq_euclid needs a euclidean space");
        return make_squared_euclidean();
    }
    if (name == "power_dist" || name == "power") {
        if (density) throw ConfigError("cost " + name + " needs a euclidean space");
        return make_power_distance(get("p"));
    }
    if (name == "bregman:quadratic") {
        no_params();
        return make_bregman_quadratic();
    }
    if (name == "bregman:entropy") {
        no_params();
        return make_bregman_entropy();
    }
    if (name == "kl") {
        no_params();
        if (!density) throw ConfigError("cost kl needs a density space");
        return make_kl();
    }
    if (name == "sinkhorn") {
        if (!density) throw ConfigError("cost sinkhorn needs a density space");
        SinkhornConfig sc;
        sc.epsilon = get("eps");
        auto support = cfg.space.support;
        if (support.empty())
            for (std::size_t i = 0; i < cfg.space.atoms; ++i) support.push_back({static_cast<double>(i)});
        sc.ground_cost = squared_euclidean_ground_cost(support);
        if (params.count("max_iters")) sc.max_iters = static_cast<std::size_t>(params.at("max_iters"));
        return make_sinkhorn_cost(sc);
    }
    throw ConfigError("unknown cost label '" + cfg.cost + "'");
}

Energy resolve_energy(const EnergySpec& spec, const ExperimentConfig& cfg) {
    const std::size_t dim = space_dim(cfg);
    Energy e;
    if (spec.name == "zero") {
        only_params(spec, {});
        e = make_zero_energy();
    } else if (spec.name == "quadratic") {
        only_params(spec, {"k"});
        e = make_quadratic(param(spec, "k", 1.0));
    } else if (spec.name == "linear") {
        only_params(spec, {});
        if (spec.vec.size() != dim) throw ConfigError("energy linear needs V with one entry per coordinate");
        e = make_linear(spec.vec);
    } else if (spec.name == "entropy") {
        only_params(spec, {});
        std::vector<double> ref = spec.vec.empty() ? cfg.space.reference : spec.vec;
        if (ref.empty()) ref.assign(dim, 1.0 / static_cast<double>(dim));
        if (ref.size() != dim) throw ConfigError("energy entropy needs a reference with one entry per atom");
        e = make_entropy(ref);
    } else if (spec.name == "quartic") {
        only_params(spec, {"k"});
        e = make_quartic(param(spec, "k", 1.0));
    } else if (spec.name == "smooth_abs") {
        only_params(spec, {"delta"});
        e = make_smooth_abs(param(spec, "delta", 0.1));
    } else if (spec.name == "abs") {
        only_params(spec, {});
        e = make_abs();
    } else {
        throw ConfigError("unknown energy label '" + spec.name + "'");
    }
    if (spec.box) e = restrict_to_box(std::move(e), spec.box->first, spec.box->second);
    if (auto b = space_bounds(cfg); b && e.descriptor.kind != EnergyKind::zero) e = restrict_to_bounds(std::move(e), *b);
    return e;
}

SplitEnergy resolve_split(const ExperimentConfig& cfg) {
    SplitEnergy se;
    se.f = resolve_energy(cfg.f, cfg);
    se.g = resolve_energy(cfg.g, cfg);
    se.lambda_f = cfg.lambda_f;
    se.lambda_g = cfg.lambda_g;
    se.tau_bar = cfg.tau_bar;
    return se;
}

Energy flow_energy(const ExperimentConfig& cfg) {
    const SplitEnergy se = resolve_split(cfg);
    return cfg.scheme == SchemeKind::implicit ? se.g : phi_energy(se);
}

Point make_point(const ExperimentConfig& cfg, const std::vector<double>& values) {
    if (values.size() != space_dim(cfg)) throw ConfigError("point needs one value per coordinate");
    if (cfg.space.kind == "density") {
        if (auto b = space_bounds(cfg)) return Point::density(values, *b);
        return Point::density(values);
    }
    return Point::euclidean(values);
}

FiniteSpace search_domain(const ExperimentConfig& cfg) {
    if (cfg.space.kind == "density") return simplex_grid(cfg.space.atoms, cfg.space.resolution, space_bounds(cfg));
    if (cfg.space.dim == 1) return uniform_grid_1d(cfg.space.lo[0], cfg.space.hi[0], cfg.space.grid);
    return uniform_grid_box(cfg.space.lo, cfg.space.hi, cfg.space.grid);
}

FiniteSpace test_points(const ExperimentConfig& cfg) {
    const std::size_t n = cfg.check_params.test_points;
    if (cfg.space.kind == "euclidean") {
        if (n < 2) throw ConfigError("check_params.test_points: euclidean grids need at least 2 points");
        if (cfg.space.dim == 1) return uniform_grid_1d(cfg.space.lo[0], cfg.space.hi[0], n);
        return uniform_grid_box(cfg.space.lo, cfg.space.hi, n);
    }
    std::mt19937_64 rng(cfg.seed);
    const auto bounds = space_bounds(cfg);
    const std::size_t d = cfg.space.atoms;
    std::vector<Point> pts;
    std::size_t attempts = 0;
    while (pts.size() < n) {
        if (++attempts > 1000000) throw ConfigError("could not draw test densities inside the bounds");
        std::vector<double> w(d);
        double s = 0.0;
        for (auto& x : w) {
            // Exponential draws from raw 53-bit uniforms, normalized: uniform on the simplex.
            const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
            s += x = -std::log(u);
        }
        for (auto& x : w) x /= s;
        if (bounds && !bounds->contains(w)) continue;
        pts.push_back(Point::density(std::move(w)));
    }
    return FiniteSpace(std::move(pts));
}

SchemeSolvers scheme_solvers(const ExperimentConfig& cfg) {
    SchemeSolvers s;
    switch (cfg.solver) {
        case SolverKind::closed_form:
            break;
        case SolverKind::exhaustive: {
            const FiniteSpace d = search_domain(cfg);
            s.p = s.q = s.r = SolverSpec::exhaustive(d);
            s.y_grid = d;
            break;
        }
        case SolverKind::numeric:
            s.p = s.q = SolverSpec::numeric(cfg.solver_tolerance);
            break;
    }
    return s;
}

LadderSpec ladder_spec(const ExperimentConfig& cfg) {
    LadderSpec s;
    s.kind = cfg.scheme;
    s.energy = resolve_split(cfg);
    s.cost = resolve_cost(cfg);
    s.tau = cfg.tau;
    s.x0 = make_point(cfg, cfg.x0);
    s.horizon = cfg.horizon;
    s.depth = cfg.ladder_depth;
    s.solvers = scheme_solvers(cfg);
    return s;
}

ContinuousCurve reference_oracle(const ExperimentConfig& cfg, std::optional<std::vector<double>> x0) {
    const Point start = make_point(cfg, x0.value_or(cfg.x0));
    const CostFn c = resolve_cost(cfg);
    const Energy phi = flow_energy(cfg);
    double margin = 0.0;
    for (double h : cfg.check_params.h_ladder) margin = std::max(margin, h);
    if (auto curve = closed_form_flow(phi, c, start, cfg.horizon + 2.0 * margin + 1.0)) return *curve;

    LadderSpec spec = ladder_spec(cfg);
    spec.x0 = start;
    const unsigned level = cfg.ladder_depth + 2;
    const double steps = static_cast<double>(steps_for(cfg.horizon, cfg.tau)) * std::ldexp(1.0, static_cast<int>(level));
    if (steps > cfg.check_params.reference_budget) {
        std::ostringstream os;
        os << "reference ladder at level " << level << " needs " << steps << " steps, budget "
           << cfg.check_params.reference_budget;
        throw BudgetError(os.str());
    }
    const SchemeRun run = run_level(spec, level);
    if (!run.complete()) throw ContractError("reference ladder failed: " + run.failure);
    return curve_from_trajectory(run.trajectory(), "ladder:P+2");
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::pass: return 0;
        case Verdict::fail: return 1;
        case Verdict::inconclusive: return 2;
    }
    return 1;
}

nlohmann::json ReportDocument::to_json() const {
    nlohmann::json j;
    j["tool_version"] = tool_version;
    j["name"] = name;
    j["command"] = command;
    j["fingerprint"] = fingerprint;
    j["seed"] = seed;
    j["reference"] = reference;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) j["checks"].push_back(evilab::to_json(c));
    j["verdict"] = to_string(verdict);
    j["exit_code"] = exit_code;
    j["runtime_ms"] = runtime_ms;
    return j;
}

Experiment run_experiment(const ExperimentConfig& cfg, Command command, RunOptions options) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    Experiment ex;
    ReportDocument& doc = ex.report;
    doc.name = cfg.name;
    doc.command = to_string(command);
    doc.fingerprint = fingerprint(cfg);
    doc.seed = cfg.seed;

    std::vector<std::string> names;
    switch (command) {
        case Command::run:
            names = cfg.checks;
            break;
        case Command::ladder:
            names = {"cauchy", "monotone_energy"};
            break;
        case Command::certify:
            for (const auto& n : cfg.checks)
                if (certificate_checks().count(n)) names.push_back(n);
            if (names.empty()) names = {"cross_concave", "cross_convex"};
            break;
        case Command::transform:
            names = {"c_concave"};
            break;
    }

    Runner runner(cfg, options);
    ex.artifacts.cost = runner.cost();
    if (command == Command::ladder) {
        runner.ladder(ex.artifacts);
        try {
            runner.reference(ex.artifacts);
        } catch (const Error& e) {
            spdlog::warn("no reference curve for plot data: {}", e.what());
        }
    }
    for (const auto& n : names) {
        spdlog::info("[{}] check {}", cfg.name, n);
        doc.checks.push_back(runner.run_check(n, ex.artifacts));
        doc.verdict = worst(doc.verdict, doc.checks.back().verdict);
    }
    doc.reference = runner.reference_source();
    doc.exit_code = exit_code(doc.verdict);
    doc.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return ex;
}

std::string trajectory_csv(const Artifacts& a) {
    std::ostringstream os;
    std::size_t d = 0;
    if (!a.runs.empty() && !a.runs.front().records.empty()) d = a.runs.front().records.front().x.dim();
    os << "level,step,time";
    for (std::size_t i = 0; i < d; ++i) os << ",x" << i;
    os << ",phi\n";
    for (const auto& run : a.runs)
        for (std::size_t k = 0; k < run.records.size(); ++k) {
            const auto& r = run.records[k];
            os << run.level << ',' << k << ',' << num(run.tau * static_cast<double>(k));
            for (double v : r.x.values()) os << ',' << num(v);
            os << ',' << num(r.phi) << '\n';
        }
    return os.str();
}

std::string phi_plotdata_csv(const Artifacts& a) {
    std::ostringstream os;
    os << "level,time,phi\n";
    for (const auto& run : a.runs)
        for (std::size_t k = 0; k < run.records.size(); ++k)
            os << run.level << ',' << num(run.tau * static_cast<double>(k)) << ',' << num(run.records[k].phi) << '\n';
    return os.str();
}

std::string cgap_plotdata_csv(const Artifacts& a) {
    std::ostringstream os;
    os << "level,time,cgap\n";
    if (!a.reference || !a.cost) return os.str();
    for (const auto& run : a.runs)
        for (std::size_t k = 0; k < run.records.size(); ++k) {
            const double t = run.tau * static_cast<double>(k);
            if (t > a.reference->horizon) break;
            os << run.level << ',' << num(t) << ',' << num((*a.cost)(run.records[k].x, (*a.reference)(t))) << '\n';
        }
    return os.str();
}

std::string residual_plotdata_csv(const Artifacts& a) {
    std::ostringstream os;
    os << "step,test_point,residual\n";
    for (std::size_t i = 0; i < a.residual_heat.size(); ++i)
        for (std::size_t k = 0; k < a.residual_heat[i].size(); ++k)
            os << i << ',' << k << ',' << num(a.residual_heat[i][k]) << '\n';
    return os.str();
}

std::string violations_csv(const ReportDocument& r) {
    std::ostringstream os;
    os << "check,level,step,test_point,time,residual,detail\n";
    auto opt = [](const auto& v) -> std::string {
        if (!v) return "";
        if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, double>) return num(*v);
        else return std::to_string(*v);
    };
    for (const auto& c : r.checks)
        for (const auto& v : c.violations) {
            std::string detail = v.detail;
            std::replace(detail.begin(), detail.end(), ',', ';');
            os << c.check_name << ',' << opt(v.where.level) << ',' << opt(v.where.step) << ','
               << opt(v.where.test_point) << ',' << opt(v.where.time) << ',' << num(v.residual) << ',' << detail << '\n';
        }
    return os.str();
}

std::string transform_csv(const Artifacts& a) {
    std::ostringstream os;
    os << "y_index,value,witness_index\n";
    if (!a.transform) return os.str();
    for (std::size_t j = 0; j < a.transform->values.size(); ++j)
        os << j << ',' << num(a.transform->values[j]) << ',' << a.transform->witness[j] << '\n';
    return os.str();
}

void write_artifacts(const Experiment& e, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto write = [&](const std::string& file, const std::string& text) {
        std::ofstream out(fs::path(dir) / file, std::ios::binary);
        if (!out) throw Error("cannot write " + (fs::path(dir) / file).string());
        out << text;
    };
    write("report.json", e.report.to_json().dump(2) + "\n");
    write("violations.csv", violations_csv(e.report));
    write("trajectory.csv", trajectory_csv(e.artifacts));
    write("plotdata_phi.csv", phi_plotdata_csv(e.artifacts));
    write("plotdata_cgap.csv", cgap_plotdata_csv(e.artifacts));
    write("plotdata_residual.csv", residual_plotdata_csv(e.artifacts));
    if (e.artifacts.transform) write("transform.csv", transform_csv(e.artifacts));
}

nlohmann::json strip_runtime(nlohmann::json j) {
    if (j.is_object()) {
        j.erase("runtime_ms");
        for (auto& [k, v] : j.items()) v = strip_runtime(v);
    } else if (j.is_array()) {
        for (auto& v : j) v = strip_runtime(v);
    }
    return j;
}

}  // namespace evilab
