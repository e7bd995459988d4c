#include "evilab/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "evilab/error.hpp"

namespace evilab {

namespace {

void require_euclidean(const Point& x, const Point& y, const char* who) {
    require_same_shape(x, y);
    if (x.kind() != PointKind::euclidean)
        throw ContractError(std::string(who) + " is defined on euclidean points only");
}

double squared_norm_diff(const Point& x, const Point& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

}  // namespace

CostFn make_squared_euclidean() {
    CostFn c;
    c.label = "sq_euclid";
    c.evaluate = [](const Point& x, const Point& y) {
        require_euclidean(x, y, "sq_euclid");
        return 0.5 * squared_norm_diff(x, y);
    };
    c.symmetric = true;
    c.dissipative = true;
    c.decomposition = CostDecomposition{c.evaluate, [](const Point&, const Point&) { return 0.0; }};
    c.grad_first = [](const Point& x, const Point& y) {
        std::vector<double> g(x.dim());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = x[i] - y[i];
        return g;
    };
    c.grad_second = [](const Point& x, const Point& y) {
        std::vector<double> g(x.dim());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = y[i] - x[i];
        return g;
    };
    return c;
}

CostFn make_power_distance(double p) {
    if (!(p >= 1.0)) throw DomainError("power distance needs p >= 1");
    CostFn c;
    std::ostringstream os;
    os << "power_dist:" << p;
    c.label = os.str();
    c.evaluate = [p](const Point& x, const Point& y) {
        require_euclidean(x, y, "power_dist");
        return std::pow(std::sqrt(squared_norm_diff(x, y)), p);
    };
    c.symmetric = true;
    c.dissipative = true;
    // Any symmetric non-negative cost decomposes as (c, 0).
    c.decomposition = CostDecomposition{c.evaluate, [](const Point&, const Point&) { return 0.0; }};
    return c;
}

CostFn make_bregman(std::string label, Potential u, PotentialGradient u_grad) {
    CostFn c;
    c.label = std::move(label);
    c.evaluate = [u, u_grad](const Point& x, const Point& y) {
        require_same_shape(x, y);
        if (x.kind() == PointKind::finite_index)
            throw ContractError("Bregman divergence needs coordinates");
        const double ux = u(x);
        const double uy = u(y);
        if (!std::isfinite(ux) || !std::isfinite(uy))
            throw DomainError("Bregman potential evaluated outside its domain");
        const std::vector<double> g = u_grad(y);
        double inner = 0.0;
        for (std::size_t i = 0; i < x.dim(); ++i) inner += g[i] * (x[i] - y[i]);
        if (!std::isfinite(inner)) throw DomainError("Bregman subgradient is not finite at y");
        return ux - uy - inner;
    };
    c.symmetric = false;
    c.dissipative = true;
    return c;
}

CostFn make_bregman_quadratic() {
    CostFn c = make_bregman(
        "bregman:quadratic",
        [](const Point& x) {
            double s = 0.0;
            for (double v : x.values()) s += v * v;
            return 0.5 * s;
        },
        [](const Point& x) { return std::vector<double>(x.values().begin(), x.values().end()); });
    c.grad_first = [](const Point& x, const Point& y) {
        std::vector<double> g(x.dim());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = x[i] - y[i];
        return g;
    };
    c.grad_second = [](const Point& x, const Point& y) {
        std::vector<double> g(x.dim());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = y[i] - x[i];
        return g;
    };
    return c;
}

CostFn make_bregman_entropy() {
    return make_bregman(
        "bregman:entropy",
        [](const Point& x) {
            double s = 0.0;
            for (double v : x.values()) {
                if (v < 0.0) return std::numeric_limits<double>::quiet_NaN();
                if (v > 0.0) s += v * std::log(v);
            }
            return s;
        },
        [](const Point& y) {
            std::vector<double> g(y.dim());
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = 1.0 + std::log(y[i]);
            return g;
        });
}

ExtReal kl_divergence(const Point& mu, const Point& nu) {
    require_same_shape(mu, nu);
    if (mu.kind() != PointKind::density) throw ContractError("KL divergence needs density points");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.dim(); ++i) {
        if (mu[i] == 0.0) continue;
        if (nu[i] == 0.0) return ExtReal::infinity();
        s += mu[i] * std::log(mu[i] / nu[i]);
    }
    // Rounding can push the sum a few ulps below zero when mu == nu.
    return ExtReal(std::max(s, 0.0));
}

CostFn make_kl() {
    CostFn c;
    c.label = "kl";
    c.evaluate = [](const Point& mu, const Point& nu) {
        const ExtReal v = kl_divergence(mu, nu);
        if (v.is_infinite()) throw DomainError("KL is infinite: nu vanishes where mu does not");
        return v.value();
    };
    c.symmetric = false;
    c.dissipative = true;
    c.grad_first = [](const Point& mu, const Point& nu) {
        std::vector<double> g(mu.dim());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::log(mu[i] / nu[i]) + 1.0;
        return g;
    };
    c.grad_second = [](const Point& mu, const Point& nu) {
        std::vector<double> g(mu.dim());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = -mu[i] / nu[i];
        return g;
    };
    return c;
}

double total_variation(const Point& mu, const Point& nu) {
    require_same_shape(mu, nu);
    double s = 0.0;
    for (std::size_t i = 0; i < mu.dim(); ++i) s += std::abs(mu[i] - nu[i]);
    return 0.5 * s;
}

double pinsker_gap(const Point& mu, const Point& nu) {
    const double tv = total_variation(mu, nu);
    return kl_divergence(mu, nu).value() - 2.0 * tv * tv;
}

CheckReport check_dissipative(const CostFn& c, const FiniteSpace& sample) {
    if (sample.empty()) throw ContractError("check_dissipative needs a non-empty sample");
    CheckReport r;
    r.check_name = "dissipative:" + c.label;
    r.tolerance = 1e-10;
    double min_off = std::numeric_limits<double>::infinity();
    Location min_where;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        for (std::size_t j = 0; j < sample.size(); ++j) {
            const double v = c(sample[i], sample[j]);
            Location where{std::nullopt, static_cast<long>(i), static_cast<long>(j), std::nullopt};
            if (i == j) {
                r.record(v, where, "c(x,x)");
            } else {
                r.record(-v, where, "-c(x,y)");
                if (v < min_off) {
                    min_off = v;
                    min_where = where;
                }
            }
        }
    }
    r.finalize();
    if (sample.size() > 1 && !(min_off > 0.0)) {
        r.verdict = Verdict::fail;
        std::ostringstream os;
        os.precision(17);
        os << "min over x != y of c(x,y) is " << min_off << " at (" << *min_where.step << ", "
           << *min_where.test_point << ")";
        r.notes.push_back(os.str());
    }
    return r;
}

RegularityModulus regularity_modulus(const CostFn& c, const FiniteSpace& sample, double r1, double r2) {
    if (!(r1 > 0.0) || !(r2 > 0.0)) throw DomainError("regularity modulus needs r1, r2 > 0");
    const std::size_t n = sample.size();
    std::vector<double> table(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) table[i * n + j] = c(sample[i], sample[j]);
    RegularityModulus out;
    bool any = false;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t x = 0; x < n; ++x) {
            if (table[p * n + x] > r1) continue;
            for (std::size_t y = 0; y < n; ++y) {
                if (table[p * n + y] > r2) continue;
                ++out.qualifying_triples;
                if (!any || table[x * n + y] > out.value) out.value = table[x * n + y];
                any = true;
            }
        }
    }
    out.no_qualifying_triple = !any;
    if (!any) out.value = 0.0;
    return out;
}

}  // namespace evilab
