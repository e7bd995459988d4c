#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "evilab/error.hpp"
#include "evilab/sinkhorn.hpp"

using namespace evilab;

namespace {

// Two atoms: the coupling has one free entry p = pi_11.
double two_atom_objective(double p, double a, double b, double c12, double c21, double eps) {
    double pi[4] = {p, a - p, b - p, 1.0 - a - b + p};
    double m[4] = {a * b, a * (1 - b), (1 - a) * b, (1 - a) * (1 - b)};
    double v = c12 * pi[1] + c21 * pi[2];
    for (int k = 0; k < 4; ++k)
        if (pi[k] > 0.0) v += eps * pi[k] * std::log(pi[k] / m[k]);
    return v;
}

double golden_oracle(double a, double b, double c12, double c21, double eps) {
    double lo = std::max(0.0, a + b - 1.0), hi = std::min(a, b);
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = two_atom_objective(x1, a, b, c12, c21, eps), f2 = two_atom_objective(x2, a, b, c12, c21, eps);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = two_atom_objective(x1, a, b, c12, c21, eps);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = two_atom_objective(x2, a, b, c12, c21, eps);
        }
    }
    return two_atom_objective(0.5 * (lo + hi), a, b, c12, c21, eps);
}

Point random_density(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& v : w) s += (v = e(rng) + 1e-2);
    for (auto& v : w) v /= s;
    double tot = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) tot += w[i];
    w[n - 1] = 1.0 - tot;
    return Point::density(w);
}

SinkhornConfig line_config(std::size_t n, double eps) {
    std::vector<std::vector<double>> support;
    for (std::size_t i = 0; i < n; ++i) support.push_back({static_cast<double>(i) / static_cast<double>(n - 1)});
    SinkhornConfig cfg;
    cfg.epsilon = eps;
    cfg.ground_cost = squared_euclidean_ground_cost(support);
    return cfg;
}

}  // namespace

TEST_CASE("single atom") {
    SinkhornConfig cfg;
    cfg.ground_cost = squared_euclidean_ground_cost({{0.0}});
    auto d = Point::density({1.0});
    CHECK(std::abs(ot_eps(d, d, cfg).value) <= 1e-14);
}

TEST_CASE("config validation") {
    SinkhornConfig cfg = line_config(3, 1.0);
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = line_config(3, 1.0);
    cfg.marginal_tol = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = line_config(3, 1.0);
    CHECK_THROWS_AS(ot_eps(Point::density({0.5, 0.5}), Point::density({0.5, 0.5}), cfg), ShapeError);
}

TEST_CASE("non-convergence carries the marginal error") {
    SinkhornConfig cfg = line_config(4, 0.01);
    cfg.max_iters = 2;
    try {
        ot_eps(Point::density({0.7, 0.1, 0.1, 0.1}), Point::density({0.1, 0.1, 0.1, 0.7}), cfg);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.last_residual() > cfg.marginal_tol);
    }
}

TEST_CASE("two-atom oracle") {
    for (double eps : {0.1, 0.5, 1.0}) {
        SinkhornConfig cfg = line_config(2, eps);
        double c = cfg.ground_cost(0, 1);
        for (auto [a, b] : {std::pair{0.5, 0.5}, {0.3, 0.6}, {0.8, 0.25}, {0.1, 0.9}}) {
            auto r = ot_eps(Point::density({a, 1 - a}), Point::density({b, 1 - b}), cfg);
            CHECK(std::abs(r.value - golden_oracle(a, b, c, c, eps)) <= 1e-8);
            CHECK(r.marginal_error <= cfg.marginal_tol);
        }
    }
}

TEST_CASE("sinkhorn divergence on five atoms") {
    std::mt19937_64 rng(21);
    for (double eps : {0.1, 1.0}) {
        SinkhornConfig cfg = line_config(5, eps);
        for (int i = 0; i < 100; ++i) {
            auto mu = random_density(rng, 5);
            auto nu = random_density(rng, 5);
            double s_mm = sinkhorn_divergence(mu, mu, cfg);
            CHECK(std::abs(s_mm) <= 1e-6);
            CHECK(std::abs(s_mm) <= 10 * cfg.marginal_tol * (1 + cfg.ground_cost.max_abs()) / eps);
            double s_mn = sinkhorn_divergence(mu, nu, cfg);
            CHECK(std::abs(s_mn - sinkhorn_divergence(nu, mu, cfg)) <= 1e-8);
            CHECK(s_mn >= -1e-8);
        }
    }
}

TEST_CASE("sinkhorn cost flags") {
    auto c = make_sinkhorn_cost(line_config(3, 1.0));
    CHECK(c.symmetric);
    auto mu = Point::density({0.2, 0.3, 0.5});
    CHECK(std::abs(c(mu, mu)) <= 1e-8);
}
