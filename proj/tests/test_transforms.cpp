#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "evilab/closed_form.hpp"
#include "evilab/error.hpp"
#include "evilab/transforms.hpp"

using namespace evilab;

namespace {

CostFn custom_cost(std::string label, std::function<double(double, double)> fn) {
    CostFn c;
    c.label = std::move(label);
    c.evaluate = [fn](const Point& x, const Point& y) { return fn(x[0], y[0]); };
    return c;
}

Energy scalar_energy(std::function<double(double)> fn) {
    Energy e;
    e.label = "test";
    e.evaluate = [fn](const Point& x) { return fn(x[0]); };
    e.in_domain = [](const Point&) { return true; };
    return e;
}

// independent scans, written without the library's helpers
std::pair<double, std::size_t> scan_transform(const Energy& f, const CostFn& c, double tau, const FiniteSpace& xs,
                                              const Point& y) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double v = f.at(xs[i]) - c(xs[i], y) / tau;
        if (v > best) { best = v; idx = i; }
    }
    return {best, idx};
}

std::pair<double, std::size_t> scan_min(const FiniteSpace& s, const std::function<double(const Point&)>& obj) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double v = obj(s[i]);
        if (v < best) { best = v; idx = i; }
    }
    return {best, idx};
}

}  // namespace

TEST_CASE("transform of zero and constants") {
    auto c = make_squared_euclidean();
    auto grid = uniform_grid_1d(-1.0, 1.0, 9);
    auto t0 = c_transform(make_zero_energy(), c, 0.5, grid, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        CHECK(t0.values[j] == 0.0);
        CHECK(t0.witness[j] == j);
    }
    auto t3 = c_transform(scalar_energy([](double) { return 3.0; }), c, 0.5, grid, grid);
    for (double v : t3.values) CHECK(v == 3.0);
}

TEST_CASE("two point transform with |x-y|") {
    auto c = custom_cost("abs", [](double x, double y) { return std::abs(x - y); });
    FiniteSpace g({Point::euclidean({0.0}), Point::euclidean({1.0})});
    auto t = c_transform(scalar_energy([](double x) { return x; }), c, 1.0, g, g);
    CHECK(t.values[0] == 0.0);
    CHECK(t.values[1] == 1.0);
    // tie at y=0: x=0 gives 0, x=1 gives 0; lowest index wins
    CHECK(t.witness[0] == 0);
}

TEST_CASE("transform errors") {
    auto c = make_squared_euclidean();
    CHECK_THROWS(c_transform(make_zero_energy(), c, 0.5, FiniteSpace{}, uniform_grid_1d(0, 1, 2)));
    CHECK_THROWS(c_transform(make_zero_energy(), c, 0.0, uniform_grid_1d(0, 1, 2), uniform_grid_1d(0, 1, 2)));
}

TEST_CASE("check_c_concave") {
    auto c = make_squared_euclidean();
    auto grid = uniform_grid_1d(-1.0, 1.0, 3);
    auto y0 = Point::euclidean({0.0});
    auto witness = scalar_energy([&](double x) { return c(Point::euclidean({x}), y0) / 0.5; });
    CHECK(check_c_concave(witness, c, 0.5, grid).passed());
    CHECK(check_c_concave(make_zero_energy(), c, 1.0, grid).passed());
    auto r = check_c_concave(scalar_energy([](double x) { return x * x; }), c, 1.0, grid);
    CHECK_FALSE(r.passed());
    CHECK(r.worst_residual > 1e-9);
}

TEST_CASE("envelope and monotonicity properties") {
    auto c = make_squared_euclidean();
    auto grid = uniform_grid_1d(-2.0, 2.0, 21);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> vals(grid.size()), bump(grid.size());
        for (std::size_t i = 0; i < vals.size(); ++i) { vals[i] = u(rng); bump[i] = vals[i] + std::abs(u(rng)); }
        auto lookup = [&grid](const std::vector<double>& v) {
            return scalar_energy([&grid, v](double x) { return v[*grid.find(Point::euclidean({x}))]; });
        };
        auto f = lookup(vals), fp = lookup(bump);
        double tau = 0.25 + 0.1 * trial;
        auto T = c_transform(f, c, tau, grid, grid);
        auto Tp = c_transform(fp, c, tau, grid, grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = 0; j < grid.size(); ++j) {
                // (f - a) + a can land one ulp below f at the witness
                double rhs = c(grid[i], grid[j]) / tau + T.values[j];
                CHECK(vals[i] <= rhs + 4 * std::numeric_limits<double>::epsilon() * (1 + std::abs(rhs)));
            }
        for (std::size_t j = 0; j < grid.size(); ++j) CHECK(T.values[j] <= Tp.values[j]);
    }
}

TEST_CASE("exhaustive oracles match an independent scan") {
    auto c = make_squared_euclidean();
    auto grid = uniform_grid_1d(-2.0, 2.0, 41);
    auto solver = SolverSpec::exhaustive(grid);
    for (const Energy& e : {make_quadratic(1.0), make_abs(), make_quartic(0.3), make_linear({0.7})}) {
        auto T = c_transform(e, c, 0.3, grid, grid);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            auto [v, idx] = scan_transform(e, c, 0.3, grid, grid[j]);
            CHECK(T.values[j] == v);
            CHECK(T.witness[j] == idx);
        }
        for (std::size_t j = 0; j < grid.size(); j += 5) {
            const Point& y0 = grid[j];
            auto p = argmin_P(e, c, 0.3, y0, solver);
            auto [pv, pi] = scan_min(grid, [&](const Point& x) { return c(x, y0) / 0.3 + e.at(x); });
            CHECK(p.value == pv);
            CHECK(p.index == std::optional<std::size_t>(pi));
            CHECK(p.value <= e.at(y0));

            auto q = argmin_Q(e, c, 0.3, y0, solver, grid);
            auto [qv, qi] = scan_min(grid, [&](const Point& y) {
                return c(y0, y) / 0.3 + scan_transform(e, c, 0.3, grid, y).first;
            });
            CHECK(q.value == qv);
            CHECK(q.index == std::optional<std::size_t>(qi));
        }
    }
}

TEST_CASE("argmin_P closed forms") {
    auto c = make_squared_euclidean();
    auto p = argmin_P(make_quadratic(1.0), c, 0.5, Point::euclidean({1.0}), SolverSpec::closed_form());
    CHECK(p.point[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    auto z = argmin_P(make_zero_energy(), c, 0.5, Point::euclidean({0.3}), SolverSpec::closed_form());
    CHECK(z.point == Point::euclidean({0.3}));
    auto n = argmin_P(make_quadratic(1.0), c, 0.5, Point::euclidean({1.0}), SolverSpec::numeric(1e-10));
    CHECK(n.point[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("argmin_P for linear energy with KL matches a fine simplex grid") {
    auto c = make_kl();
    auto grid = simplex_line(2001, 1e-3);
    auto g = make_linear({1.0, -0.5});
    for (double a : {0.2, 0.5, 0.8}) {
        auto y0 = Point::density({a, 1.0 - a});
        auto cf = argmin_P(g, c, 0.1, y0, SolverSpec::closed_form());
        auto ex = argmin_P(g, c, 0.1, y0, SolverSpec::exhaustive(grid));
        CHECK(std::abs(cf.point[0] - ex.point[0]) <= 1e-3);
        CHECK(cf.value <= ex.value + 1e-12);
    }
}

TEST_CASE("argmin_Q against fine grids") {
    auto sq = make_squared_euclidean();
    auto line = uniform_grid_1d(-2.0, 2.0, 4001);
    auto f = make_quadratic(0.5);
    auto x0 = Point::euclidean({1.0});
    auto cf = argmin_Q(f, sq, 0.05, x0, SolverSpec::closed_form(), FiniteSpace{});
    // explicit step of the gradient: y = x0 - tau * grad f (1 + O(tau))
    CHECK(cf.point[0] == doctest::Approx(1.0 - 0.05 * 0.5).epsilon(0.01));
    CHECK(cf.value == doctest::Approx(f.at(x0)).epsilon(1e-10));
    auto ex = argmin_Q(f, sq, 0.05, x0, SolverSpec::exhaustive(line), line);
    CHECK(std::abs(cf.point[0] - ex.point[0]) <= 2e-3);

    auto kl = make_kl();
    auto simplex = simplex_line(401, 1e-2);
    auto lin = make_linear({1.0, 0.0});
    auto xk = Point::density({0.5, 0.5});
    auto qk = argmin_Q(lin, kl, 0.1, xk, SolverSpec::closed_form(), FiniteSpace{});
    auto qe = argmin_Q(lin, kl, 0.1, xk, SolverSpec::exhaustive(simplex), simplex);
    CHECK(std::abs(qk.point[0] - qe.point[0]) <= 5e-3);
    CHECK(qk.value == doctest::Approx(lin.at(xk)).epsilon(1e-10));
}

TEST_CASE("argmin_Q on a non-concave f warns") {
    auto c = make_squared_euclidean();
    auto grid = uniform_grid_1d(-1.0, 1.0, 3);
    auto f = scalar_energy([](double x) { return x * x; });
    auto q = argmin_Q(f, c, 1.0, Point::euclidean({1.0}), SolverSpec::exhaustive(grid), grid);
    CHECK_FALSE(q.warnings.empty());
}

TEST_CASE("argmin_R and member_S") {
    auto sq = make_squared_euclidean();
    auto x0 = Point::euclidean({0.4});
    auto r = argmin_R(sq, x0, SolverSpec::closed_form());
    CHECK(r.point == x0);
    CHECK(r.value == 0.0);
    CHECK(member_S(sq, x0, SolverSpec::closed_form()).point == x0);

    auto grid = uniform_grid_1d(-2.0, 2.0, 41);
    auto shifted = custom_cost("shift", [](double x, double y) { return (x - y - 1) * (x - y - 1); });
    auto r2 = argmin_R(shifted, Point::euclidean({0.0}), SolverSpec::exhaustive(grid));
    CHECK(r2.point[0] == doctest::Approx(-1.0));
    auto back = custom_cost("back", [](double x, double y) { return (x - y + 1) * (x - y + 1); });
    auto s = member_S(back, Point::euclidean({0.0}), SolverSpec::exhaustive(grid));
    CHECK(s.point[0] == doctest::Approx(1.0));

    // two grid points at the same distance: lowest index
    auto flat = custom_cost("flat", [](double x, double y) { return std::abs(std::abs(x - y) - 1.0); });
    auto r3 = argmin_R(flat, Point::euclidean({0.0}), SolverSpec::exhaustive(grid));
    CHECK(r3.point[0] == doctest::Approx(-1.0));
    CHECK(r3.ties == 1);

    // x0 only minimizes c(., xi) at the grid edge, never at 0
    auto tilted = custom_cost("tilted", [](double x, double y) { return x + 0 * y; });
    CHECK_THROWS_AS(member_S(tilted, Point::euclidean({0.0}), SolverSpec::exhaustive(grid)), EmptySetError);
}

TEST_CASE("closed-form registry is verified before use") {
    auto& reg = ClosedFormRegistry::global();
    for (const auto& v : reg.verify_all()) {
        INFO(v.key << ": " << v.detail);
        CHECK(v.passed);
        CHECK(v.worst_value_excess <= 1e-10);
    }
}
