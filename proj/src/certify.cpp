#include "evilab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "evilab/error.hpp"
#include "evilab/parallel.hpp"

namespace evilab {

namespace {

Location at_index(std::optional<long> step, std::optional<long> test, std::optional<double> t = std::nullopt) {
    return Location{std::nullopt, step, test, t};
}

// Deterministic reduction of per-slot entries gathered in parallel.
struct Entry {
    double residual;
    Location where;
    std::string detail;
};

void merge(CheckReport& r, const std::vector<std::vector<Entry>>& slots) {
    for (const auto& slot : slots)
        for (const auto& e : slot) r.record(e.residual, e.where, e.detail);
}

std::map<std::string, double> parse_params(const std::string& text) {
    std::map<std::string, double> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("slack parameter '" + item + "' is not key=value");
        try {
            out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("slack parameter '" + item + "' has a non-numeric value");
        }
    }
    return out;
}

// M_t / t must not increase as t decreases over the three smallest positive grid points.
void check_slack_decay(CheckReport& r, const std::vector<double>& t_grid, const std::vector<double>& ratios,
                       long instance) {
    std::vector<std::pair<double, double>> v;
    for (std::size_t k = 0; k < t_grid.size(); ++k)
        if (t_grid[k] > 0.0) v.emplace_back(t_grid[k], ratios[k]);
    std::sort(v.begin(), v.end());
    if (v.size() > 3) v.resize(3);
    for (std::size_t k = 0; k + 1 < v.size(); ++k)
        r.record(v[k].second - v[k + 1].second, at_index(instance, std::nullopt, v[k].first), "M_t/t increases as t -> 0");
}

void require_t_grid(const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw ContractError("t grid is empty");
    for (double t : t_grid)
        if (!(t >= 0.0 && t <= 1.0)) throw ContractError("t grid values must lie in [0, 1]");
}

}  // namespace

Point SegmentProvider::operator()(const Point& x0, const Point& x1, double t) const {
    if (t == 0.0) return x0;
    if (t == 1.0) return x1;
    return generator(x0, x1, t);
}

SegmentProvider linear_in_coordinates() {
    return {"linear-in-coordinates", [](const Point& a, const Point& b, double t) {
                require_same_shape(a, b);
                if (a.kind() != PointKind::euclidean) throw ContractError("linear-in-coordinates needs euclidean points");
                std::vector<double> v(a.dim());
                for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - t) * a[i] + t * b[i];
                return Point::euclidean(std::move(v));
            }};
}

SegmentProvider linear_in_weights() {
    return {"linear-in-weights", [](const Point& a, const Point& b, double t) {
                require_same_shape(a, b);
                if (a.kind() != PointKind::density) throw ContractError("linear-in-weights needs densities");
                std::vector<double> v(a.dim());
                double s = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i) s += v[i] = (1.0 - t) * a[i] + t * b[i];
                for (double& w : v) w /= s;
                return Point::density(std::move(v));
            }};
}

SegmentProvider default_segment(const Point& sample) {
    return sample.kind() == PointKind::density ? linear_in_weights() : linear_in_coordinates();
}

SlackFunction slack_zero() { return {"zero", [](const SlackContext&) { return 0.0; }}; }

SlackFunction slack_t_squared(double scale) {
    return {"t2:scale=" + std::to_string(scale), [scale](const SlackContext& s) { return scale * s.t * s.t * s.gap; }};
}

SlackFunction slack_ohta(double lambda, double p) {
    if (!(p > 1.0)) throw ConfigError("ohta slack needs p > 1");
    const double m = std::max(1.0, lambda);
    return {"ohta:lambda=" + std::to_string(lambda) + ",p=" + std::to_string(p),
            [m, p](const SlackContext& s) { return m * std::pow(s.t, p) * s.gap; }};
}

SlackFunction slack_curve_gap(double scale) {
    return {"curve_gap:scale=" + std::to_string(scale), [scale](const SlackContext& s) { return scale * s.curve_gap; }};
}

SlackFunction parse_slack(const std::string& label) {
    const auto colon = label.find(':');
    const std::string name = label.substr(0, colon);
    const auto params = colon == std::string::npos ? std::map<std::string, double>{} : parse_params(label.substr(colon + 1));
    auto get = [&](const std::string& k, std::optional<double> dflt) {
        auto it = params.find(k);
        if (it != params.end()) return it->second;
        if (!dflt) throw ConfigError("slack '" + name + "' needs parameter " + k);
        return *dflt;
    };
    auto only = [&](std::initializer_list<const char*> keys) {
        for (const auto& [k, v] : params) {
            bool ok = false;
            for (const char* key : keys) ok = ok || k == key;
            if (!ok) throw ConfigError("slack '" + name + "' has unknown parameter " + k);
        }
    };
    if (name == "zero") {
        only({});
        return slack_zero();
    }
    if (name == "t2") {
        only({"scale"});
        return slack_t_squared(get("scale", 1.0));
    }
    if (name == "ohta") {
        only({"lambda", "p"});
        return slack_ohta(get("lambda", std::nullopt), get("p", std::nullopt));
    }
    if (name == "curve_gap") {
        only({"scale"});
        return slack_curve_gap(get("scale", 1.0));
    }
    throw ConfigError("unknown slack function '" + label + "'");
}

CheckReport check_cross_concave(const Energy& g, const CostFn& c, double tau, double mu, const FiniteSpace& domain,
                                const SolverSpec& p_solver, const SolverSpec& r_solver) {
    if (!(tau > 0.0)) throw ContractError("tau must be positive");
    if (domain.empty()) throw ContractError("cross-concavity needs a non-empty domain");
    CheckReport r;
    r.check_name = "cross_concave";
    r.tolerance = 1e-10;
    const std::size_t n = domain.size();
    std::vector<std::vector<Entry>> slots(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
            const Point& y0 = domain[j];
            auto& out = slots[j];
            std::optional<Point> x1o, y1o;
            try {
                x1o = argmin_P(g, c, tau, y0, p_solver).point;
                y1o = argmin_R(c, *x1o, r_solver).point;
            } catch (const EmptySetError& ex) {
                out.push_back({std::numeric_limits<double>::infinity(), at_index(static_cast<long>(j), std::nullopt),
                               std::string("hypothesis failure: ") + ex.what()});
                continue;
            }
            const Point& x1 = *x1o;
            const Point& y1 = *y1o;
            const double g1 = g.at(x1);
            const double c10 = c(x1, y0), c11 = c(x1, y1);
            for (std::size_t i = 0; i < n; ++i) {
                const Point& x = domain[i];
                const ExtReal gx = g(x);
                if (gx.is_infinite()) continue;
                const double res = -gx.value() + g1 - (c(x, y0) - c10) / tau + (1.0 + mu) * (c(x, y1) - c11) / tau;
                out.push_back({res, at_index(static_cast<long>(j), static_cast<long>(i)), "(y0, x)"});
            }
        }
    });
    merge(r, slots);
    r.notes.push_back("step index = y0, test point = x; sweep of " + std::to_string(n) + "x" + std::to_string(n));
    r.finalize();
    return r;
}

CheckReport check_cross_concave(const Energy& g, const CostFn& c, double tau, double mu, const FiniteSpace& domain) {
    const SolverSpec s = SolverSpec::exhaustive(domain);
    return check_cross_concave(g, c, tau, mu, domain, s, s);
}

CheckReport check_cross_convex(const Energy& f, const CostFn& c, double tau, double mu, const FiniteSpace& domain,
                               const SolverSpec& q_solver, const SolverSpec& s_solver) {
    if (!(tau > 0.0)) throw ContractError("tau must be positive");
    if (domain.empty()) throw ContractError("cross-convexity needs a non-empty domain");
    CheckReport r;
    r.check_name = "cross_convex";
    r.tolerance = 1e-10;
    if (q_solver.kind == SolverKind::exhaustive) {
        const CheckReport cc = check_c_concave(f, c, tau, domain);
        if (!cc.passed()) r.notes.push_back("warning: f is not c/tau-concave on the domain");
    }
    const std::size_t n = domain.size();
    std::optional<TransformResult> cached;
    if (q_solver.kind == SolverKind::exhaustive) cached = c_transform(f, c, tau, *q_solver.domain, domain);
    std::vector<std::vector<Entry>> slots(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
            const Point& x0 = domain[j];
            auto& out = slots[j];
            std::optional<Point> xio, y0o;
            try {
                xio = member_S(c, x0, s_solver).point;
                y0o = argmin_Q(f, c, tau, x0, q_solver, domain, cached ? &*cached : nullptr).point;
            } catch (const EmptySetError& ex) {
                out.push_back({std::numeric_limits<double>::infinity(), at_index(static_cast<long>(j), std::nullopt),
                               std::string("hypothesis failure: ") + ex.what()});
                continue;
            }
            const Point& xi0 = *xio;
            const Point& y0 = *y0o;
            const double f0 = f.at(x0);
            const double c0x = c(x0, xi0), c0y = c(x0, y0);
            for (std::size_t i = 0; i < n; ++i) {
                const Point& x = domain[i];
                const ExtReal fx = f(x);
                if (fx.is_infinite()) continue;
                const double dxi = c(x, xi0) - c0x;
                const double res = -(fx.value() - f0) + (-dxi + (c(x, y0) - c0y) + mu * dxi) / tau;
                out.push_back({res, at_index(static_cast<long>(j), static_cast<long>(i)), "(x0, x)"});
            }
        }
    });
    merge(r, slots);
    r.notes.push_back("step index = x0, test point = x; sweep of " + std::to_string(n) + "x" + std::to_string(n));
    r.finalize();
    return r;
}

CheckReport check_cross_convex(const Energy& f, const CostFn& c, double tau, double mu, const FiniteSpace& domain) {
    const SolverSpec s = SolverSpec::exhaustive(domain);
    return check_cross_convex(f, c, tau, mu, domain, s, s);
}

CheckReport check_compat_concave(const Energy& g, const CostFn& c, double lambda, const SegmentProvider& segment,
                                 const SlackFunction& M, const std::vector<ConcaveTriple>& triples,
                                 const std::vector<double>& t_grid, const SolverSpec& r_solver, double tolerance) {
    require_t_grid(t_grid);
    CheckReport r;
    r.check_name = "compat_concave";
    r.tolerance = tolerance;
    r.notes.push_back("segment " + segment.label + ", slack " + M.label);
    std::vector<std::vector<Entry>> slots(triples.size());
    std::vector<std::vector<double>> ratios(triples.size(), std::vector<double>(t_grid.size(), 0.0));
    parallel_for(triples.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            const auto& [y0, x1, x] = triples[k];
            auto& out = slots[k];
            const Point y1 = argmin_R(c, x1, r_solver).point;
            const double g1 = g.at(x1), gx = g.at(x);
            const double c1y1 = c(x1, y1), gap = c(x, y1) - c1y1;
            const double c10 = c(x1, y0), cx0 = c(x, y0);
            for (std::size_t q = 0; q < t_grid.size(); ++q) {
                const double t = t_grid[q];
                const Point gt = segment(x1, x, t);
                const double m = M({t, gap, c(gt, y1) - c1y1});
                if (t > 0.0) ratios[k][q] = m / t;
                const Location loc = at_index(static_cast<long>(k), std::nullopt, t);
                const ExtReal gg = g(gt);
                if (gg.is_infinite()) {
                    out.push_back({std::numeric_limits<double>::infinity(), loc, "gamma(t) leaves dom(g)"});
                    continue;
                }
                out.push_back({gg.value() - (1.0 - t) * g1 - t * gx + lambda * t * gap - m, loc, "energy inequality"});
                out.push_back({c(gt, y0) - (1.0 - t) * c10 - t * cx0 + t * gap - m, loc, "cost inequality"});
            }
        }
    });
    merge(r, slots);
    for (std::size_t k = 0; k < triples.size(); ++k) check_slack_decay(r, t_grid, ratios[k], static_cast<long>(k));
    r.notes.push_back("step index = triple");
    r.finalize();
    return r;
}

CheckReport check_compat_convex(const Energy& f, const CostFn& c, double tau, double lambda,
                                const SegmentProvider& segment, const SlackFunction& M,
                                const std::vector<std::pair<Point, Point>>& pairs, const std::vector<double>& t_grid,
                                const SolverSpec& q_solver, const SolverSpec& s_solver, const FiniteSpace& y_grid,
                                double tolerance) {
    require_t_grid(t_grid);
    CheckReport r;
    r.check_name = "compat_convex";
    r.tolerance = tolerance;
    r.notes.push_back("segment " + segment.label + ", slack " + M.label);
    std::vector<std::vector<Entry>> slots(pairs.size());
    std::vector<std::vector<double>> ratios(pairs.size(), std::vector<double>(t_grid.size(), 0.0));
    std::vector<std::size_t> missing(pairs.size(), 0);
    parallel_for(pairs.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            const auto& [x0, x] = pairs[k];
            auto& out = slots[k];
            const Point xi0 = member_S(c, x0, s_solver).point;
            const double f0 = f.at(x0), fx = f.at(x);
            const double c0xi = c(x0, xi0), gap = c(x, xi0) - c0xi;
            for (std::size_t q = 0; q < t_grid.size(); ++q) {
                const double t = t_grid[q];
                const Location loc = at_index(static_cast<long>(k), std::nullopt, t);
                const Point gt = segment(x0, x, t);
                const double m = M({t, gap, c(gt, xi0) - c0xi});
                if (t > 0.0) ratios[k][q] = m / t;
                const ExtReal fg = f(gt);
                if (fg.is_infinite()) {
                    out.push_back({std::numeric_limits<double>::infinity(), loc, "gamma(t) leaves dom(f)"});
                    continue;
                }
                Point z = gt;
                double transform = 0.0;
                try {
                    z = argmin_Q(f, c, tau, gt, q_solver, y_grid).point;
                    transform = c_transform_at(f, c, tau, z, q_solver);
                } catch (const DomainError&) {
                    ++missing[k];
                    continue;
                } catch (const EmptySetError&) {
                    ++missing[k];
                    continue;
                }
                const double cgz = c(gt, z);
                out.push_back({fg.value() - (1.0 - t) * f0 - t * fx + lambda * t * gap - m, loc, "energy inequality"});
                out.push_back({(1.0 - t) * c(x0, z) + t * c(x, z) - t * gap - m - cgz, loc, "cost inequality"});
                out.push_back({std::abs(fg.value() - transform - cgz / tau), loc, "coupling defect"});
            }
        }
    });
    merge(r, slots);
    for (std::size_t k = 0; k < pairs.size(); ++k) check_slack_decay(r, t_grid, ratios[k], static_cast<long>(k));
    std::size_t total_missing = 0;
    for (auto m : missing) total_missing += m;
    r.notes.push_back("step index = pair");
    r.finalize();
    if (total_missing) {
        r.notes.push_back(std::to_string(total_missing) + " (pair, t) entries without a z witness");
        if (r.verdict == Verdict::pass) r.verdict = Verdict::inconclusive;
    }
    return r;
}

std::vector<std::vector<double>> nncc_table(const CostFn& c, const SegmentProvider& gamma, const Point& x0,
                                            const Point& x1, const Point& ybar, const FiniteSpace& y_grid,
                                            const std::vector<double>& t_grid) {
    require_t_grid(t_grid);
    const double d0 = c(x0, ybar), d1 = c(x1, ybar);
    std::vector<std::vector<double>> table(t_grid.size(), std::vector<double>(y_grid.size()));
    for (std::size_t q = 0; q < t_grid.size(); ++q) {
        const double s = t_grid[q];
        const Point gs = gamma(x0, x1, s);
        const double gb = c(gs, ybar);
        for (std::size_t k = 0; k < y_grid.size(); ++k) {
            const Point& y = y_grid[k];
            table[q][k] = gb - c(gs, y) - (1.0 - s) * (d0 - c(x0, y)) - s * (d1 - c(x1, y));
        }
    }
    return table;
}

CheckReport check_nncc_segment(const CostFn& c, const SegmentProvider& gamma, const Point& x0, const Point& x1,
                               const Point& ybar, const FiniteSpace& y_grid, const std::vector<double>& t_grid,
                               double tolerance) {
    CheckReport r;
    r.check_name = "nncc_segment";
    r.tolerance = tolerance;
    r.notes.push_back("segment " + gamma.label);
    const auto table = nncc_table(c, gamma, x0, x1, ybar, y_grid, t_grid);
    double magnitude = 0.0;
    for (std::size_t q = 0; q < table.size(); ++q)
        for (std::size_t k = 0; k < table[q].size(); ++k) {
            magnitude = std::max(magnitude, std::abs(table[q][k]));
            r.record(table[q][k], Location{std::nullopt, static_cast<long>(q), static_cast<long>(k), t_grid[q]}, "(s, y)");
        }
    std::ostringstream os;
    os << "max |residual| = " << magnitude;
    r.notes.push_back(os.str());
    r.finalize();
    return r;
}

CheckReport check_semiconvex_along_segment(const Energy& phi, const CostFn& c, double lambda,
                                           const SegmentProvider& gamma, const Point& x0, const Point& x,
                                           const std::vector<double>& t_grid, const std::function<double(double)>& M,
                                           double tolerance) {
    require_t_grid(t_grid);
    CheckReport r;
    r.check_name = "semiconvex_segment";
    r.tolerance = tolerance;
    const double p0 = phi.at(x0), px = phi.at(x), cxx = c(x, x0);
    for (double t : t_grid) {
        const Point gt = gamma(x0, x, t);
        const ExtReal pg = phi(gt);
        const Location loc{std::nullopt, std::nullopt, std::nullopt, t};
        if (pg.is_infinite()) {
            r.record(std::numeric_limits<double>::infinity(), loc, "gamma(t) leaves dom(phi)");
            continue;
        }
        const double m = M ? M(t) : 0.0;
        r.record(pg.value() - (1.0 - t) * p0 - t * px + lambda * t * cxx - m, loc, "semiconvexity");
    }
    r.finalize();
    return r;
}

CheckReport midpoint_concavity_check(const MetricFn& d, const FiniteSpace& grid, unsigned n, double eps) {
    if (n == 0) throw ContractError("midpoint level n starts at 1");
    if (!(eps >= 0.0)) throw ContractError("eps must be non-negative");
    const std::size_t m = grid.size();
    // Spot checks of symmetry and the triangle inequality on the first few points.
    const std::size_t probe = std::min<std::size_t>(m, 12);
    for (std::size_t i = 0; i < probe; ++i)
        for (std::size_t j = 0; j < probe; ++j) {
            const double dij = d(grid[i], grid[j]);
            if (std::abs(dij - d(grid[j], grid[i])) > 1e-12 * (1.0 + dij)) throw ContractError("metric is not symmetric");
            for (std::size_t k = 0; k < probe; ++k)
                if (dij > d(grid[i], grid[k]) + d(grid[k], grid[j]) + 1e-12 * (1.0 + dij))
                    throw ContractError("metric violates the triangle inequality");
        }
    CheckReport r;
    r.check_name = "midpoint_concavity";
    r.tolerance = 1e-10;
    const double scale = std::pow(2.0, -0.5 * static_cast<double>(n - 1));
    std::vector<double> D(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) D[i * m + j] = scale * d(grid[i], grid[j]);
    std::vector<std::vector<Entry>> slots(m);
    parallel_for(m, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            for (std::size_t j = i; j < m; ++j) {
                const double dij = D[i * m + j];
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < m; ++k) {
                    const double a = D[i * m + k], bb = D[j * m + k];
                    best = std::min(best, a * a + bb * bb);
                }
                const double slack = best - 0.5 * dij * dij;
                const double allowed = 2.0 * (0.5 * dij + eps) * (0.5 * dij + eps) - 0.5 * dij * dij;
                slots[i].push_back({slack - allowed, Location{std::nullopt, static_cast<long>(i), static_cast<long>(j), std::nullopt},
                                    "midpoint slack beyond the eps allowance"});
            }
        }
    });
    merge(r, slots);
    r.notes.push_back("level n=" + std::to_string(n) + ", eps=" + std::to_string(eps));
    r.finalize();
    return r;
}

CheckReport lemma_consistency(const CheckReport& compat, const CheckReport& cross) {
    CheckReport r;
    r.check_name = "lemma_consistency";
    r.tolerance = 0.0;
    const bool implication = !compat.passed() || cross.passed();
    r.record(implication ? 0.0 : 1.0, Location{}, compat.check_name + " => " + cross.check_name);
    if (!compat.passed()) r.notes.push_back("premise " + compat.check_name + " did not pass; implication vacuous");
    r.finalize();
    return r;
}

std::vector<double> default_t_grid(std::size_t count) {
    if (count < 2) throw ContractError("t grid needs at least two points");
    std::vector<double> t{1e-4, 1e-3, 1e-2};
    for (std::size_t i = 0; i < count; ++i) t.push_back(static_cast<double>(i) / static_cast<double>(count - 1));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

}  // namespace evilab
