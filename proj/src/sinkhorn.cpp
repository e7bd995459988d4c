#include "evilab/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

#include "evilab/error.hpp"

namespace evilab {

double GroundCost::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

GroundCost make_ground_cost(const std::vector<std::vector<double>>& support,
                            const std::function<double(const std::vector<double>&,
                                                       const std::vector<double>&)>& c_x) {
    GroundCost g;
    g.n = support.size();
    g.values.resize(g.n * g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j) g.values[i * g.n + j] = c_x(support[i], support[j]);
    return g;
}

GroundCost squared_euclidean_ground_cost(const std::vector<std::vector<double>>& support) {
    return make_ground_cost(support, [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) throw ShapeError("support coordinates differ in dimension");
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
        return 0.5 * s;
    });
}

void SinkhornConfig::validate() const {
    if (!(epsilon > 0.0)) throw DomainError("sinkhorn epsilon must be positive");
    if (!(marginal_tol > 0.0)) throw DomainError("sinkhorn marginal_tol must be positive");
    if (max_iters == 0) throw DomainError("sinkhorn max_iters must be positive");
    if (ground_cost.values.size() != ground_cost.n * ground_cost.n)
        throw ShapeError("ground cost matrix is not n x n");
}

namespace {

double log_sum_exp(const std::vector<double>& terms) {
    double m = -std::numeric_limits<double>::infinity();
    for (double t : terms) m = std::max(m, t);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

}  // namespace

OtResult ot_eps(const Point& mu, const Point& nu, const SinkhornConfig& cfg) {
    cfg.validate();
    require_same_shape(mu, nu);
    if (mu.kind() != PointKind::density) throw ContractError("ot_eps needs density points");
    const std::size_t n = mu.dim();
    if (cfg.ground_cost.n != n) throw ShapeError("ground cost size does not match the support");

    const double eps = cfg.epsilon;
    const GroundCost& C = cfg.ground_cost;
    std::vector<double> f(n, 0.0), g(n, 0.0), terms;
    terms.reserve(n);

    auto update_f = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            if (mu[i] == 0.0) continue;
            terms.clear();
            for (std::size_t j = 0; j < n; ++j)
                if (nu[j] > 0.0) terms.push_back(std::log(nu[j]) + (g[j] - C(i, j)) / eps);
            f[i] = -eps * log_sum_exp(terms);
        }
    };
    auto update_g = [&] {
        for (std::size_t j = 0; j < n; ++j) {
            if (nu[j] == 0.0) continue;
            terms.clear();
            for (std::size_t i = 0; i < n; ++i)
                if (mu[i] > 0.0) terms.push_back(std::log(mu[i]) + (f[i] - C(i, j)) / eps);
            g[j] = -eps * log_sum_exp(terms);
        }
    };
    auto coupling = [&](std::size_t i, std::size_t j) {
        if (mu[i] == 0.0 || nu[j] == 0.0) return 0.0;
        return mu[i] * nu[j] * std::exp((f[i] + g[j] - C(i, j)) / eps);
    };
    // Columns are exact after the g update, so only rows need checking.
    auto row_error = [&] {
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            for (std::size_t j = 0; j < n; ++j) r += coupling(i, j);
            err = std::max(err, std::abs(r - mu[i]));
        }
        return err;
    };

    OtResult out;
    double err = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
        update_f();
        update_g();
        err = row_error();
        out.iterations = it;
        if (err <= cfg.marginal_tol) break;
    }
    out.marginal_error = err;
    if (!(err <= cfg.marginal_tol)) {
        std::ostringstream os;
        os << "sinkhorn did not reach marginal_tol " << cfg.marginal_tol << " in " << cfg.max_iters
           << " iterations";
        throw ConvergenceError(os.str(), err);
    }

    double dual = 0.0, mass = 0.0, primal = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (mu[i] > 0.0) dual += f[i] * mu[i];
        if (nu[i] > 0.0) dual += g[i] * nu[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double p = coupling(i, j);
            if (p <= 0.0) continue;
            mass += p;
            primal += p * C(i, j) + eps * p * std::log(p / (mu[i] * nu[j]));
        }
    }
    out.value = dual - eps * (mass - 1.0);
    out.primal_dual_gap = primal - out.value;
    spdlog::debug("ot_eps: {} iterations, marginal error {:.3e}, primal-dual gap {:.3e}",
                  out.iterations, out.marginal_error, out.primal_dual_gap);
    return out;
}

double sinkhorn_divergence(const Point& mu, const Point& nu, const SinkhornConfig& cfg) {
    const double ab = ot_eps(mu, nu, cfg).value;
    const double aa = ot_eps(mu, mu, cfg).value;
    const double bb = ot_eps(nu, nu, cfg).value;
    return ab - 0.5 * aa - 0.5 * bb;
}

CostFn make_sinkhorn_cost(SinkhornConfig cfg) {
    cfg.validate();
    CostFn c;
    std::ostringstream os;
    os << "sinkhorn:eps=" << cfg.epsilon;
    c.label = os.str();
    c.evaluate = [cfg](const Point& mu, const Point& nu) {
        if (mu == nu) return 0.0;
        return sinkhorn_divergence(mu, nu, cfg);
    };
    c.symmetric = true;
    c.dissipative = true;
    return c;
}

}  // namespace evilab
