#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evilab/error.hpp"
#include "evilab/schemes.hpp"

using namespace evilab;

namespace {

SchemeSolvers closed() { return SchemeSolvers{}; }

SchemeSolvers exhaustive(const FiniteSpace& grid) {
    auto s = SolverSpec::exhaustive(grid);
    return SchemeSolvers{s, s, s, grid};
}

LadderSpec quadratic_ladder(double tau, double horizon, unsigned depth) {
    LadderSpec spec;
    spec.energy = SplitEnergy{make_zero_energy(), make_quadratic(1.0), 0.0, 1.0, 1e9};
    spec.cost = make_squared_euclidean();
    spec.tau = tau;
    spec.x0 = Point::euclidean({1.0});
    spec.horizon = horizon;
    spec.depth = depth;
    return spec;
}

}  // namespace

TEST_CASE("implicit quadratic iterates") {
    auto run = run_implicit(make_quadratic(1.0), make_squared_euclidean(), 0.5, Point::euclidean({1.0}), 2,
                            closed());
    REQUIRE(run.complete());
    REQUIRE(run.records.size() == 3);
    CHECK(run.records[0].x[0] == 1.0);
    CHECK(run.records[1].x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(run.records[2].x[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
    for (const auto& r : run.records) CHECK(r.y == r.x);
}

TEST_CASE("constant energy is stationary") {
    auto grid = uniform_grid_1d(-1.0, 1.0, 21);
    Energy k = make_zero_energy();
    auto run = run_implicit(k, make_squared_euclidean(), 0.1, grid[13], 10, exhaustive(grid));
    for (const auto& r : run.records) CHECK(r.x == grid[13]);
}

TEST_CASE("phi strictly decreasing and the one-step estimate") {
    auto c = make_squared_euclidean();
    auto g = make_quadratic(1.0);
    auto run = run_implicit(g, c, 0.1, Point::euclidean({1.0}), 30, closed());
    CHECK(monotone_energy(run).passed());
    for (std::size_t i = 0; i + 1 < run.records.size(); ++i) {
        const auto& a = run.records[i];
        const auto& b = run.records[i + 1];
        CHECK(b.phi < a.phi);
        CHECK(c(b.x, a.y) <= 0.1 * (g.at(a.x) - g.at(b.x)) + 1e-15);
    }
}

TEST_CASE("splitting with f = 0 reproduces the implicit run") {
    auto grid = uniform_grid_1d(-2.0, 2.0, 41);
    auto c = make_squared_euclidean();
    auto g = make_quartic(0.5);
    auto imp = run_implicit(g, c, 0.2, grid[35], 12, exhaustive(grid));
    SplitEnergy se{make_zero_energy(), g, 0.0, 0.0, 1e9};
    auto spl = run_splitting(se, c, 0.2, grid[35], 12, exhaustive(grid));
    REQUIRE(imp.records.size() == spl.records.size());
    for (std::size_t i = 0; i < imp.records.size(); ++i) CHECK(imp.records[i].x == spl.records[i].x);
}

TEST_CASE("KL mirror step matches the grid iteration") {
    auto kl = make_kl();
    auto grid = simplex_line(2001, 1e-3);
    SplitEnergy se{make_linear({1.0, 0.0}), make_zero_energy(), 0.0, 0.0, 1e9};
    auto x0 = Point::density({0.5, 0.5});
    auto cf = run_splitting(se, kl, 0.05, x0, 10, closed());
    REQUIRE(cf.complete());
    // grid oracle restarted from each closed-form iterate
    for (std::size_t i = 0; i + 1 < cf.records.size(); ++i) {
        auto q = argmin_Q(se.f, kl, 0.05, cf.records[i].x, SolverSpec::exhaustive(grid), grid);
        CHECK(std::abs(q.point[0] - cf.records[i + 1].x[0]) <= 1e-3);
    }
    // the mass moves away from the atom with the larger potential
    CHECK(cf.records.back().x[0] < 0.5);
}

TEST_CASE("splitting on R^2 with a boxed quadratic is monotone") {
    double lo[2] = {-1.0, -1.0}, hi[2] = {1.0, 1.0};
    auto grid = uniform_grid_box(lo, hi, 21);
    SplitEnergy se{make_quadratic(0.5), restrict_to_box(make_quadratic(1.0), -0.5, 0.5), 0.5, 1.0, 1e9};
    auto run = run_splitting(se, make_squared_euclidean(), 0.1, Point::euclidean({0.5, -0.4}), 50, exhaustive(grid));
    REQUIRE(run.complete());
    CHECK(monotone_energy(run).passed());
    for (const auto& r : run.records) CHECK(r.z == r.x);
}

TEST_CASE("ladder bookkeeping") {
    auto spec = quadratic_ladder(0.1, 2.0, 0);
    auto l0 = dyadic_ladder(spec);
    REQUIRE(l0.runs.size() == 1);
    auto direct = run_implicit(make_quadratic(1.0), spec.cost, 0.1, spec.x0, 20, closed());
    for (std::size_t i = 0; i < direct.records.size(); ++i) CHECK(l0.runs[0].records[i].x == direct.records[i].x);

    auto l6 = dyadic_ladder(quadratic_ladder(0.1, 2.0, 6));
    REQUIRE(l6.complete());
    REQUIRE(l6.runs.size() == 7);
    for (unsigned p = 0; p <= 6; ++p) {
        CHECK(l6.runs[p].records.size() == (20u << p) + 1);
        CHECK(l6.runs[p].tau == doctest::Approx(0.1 / (1 << p)));
    }
    CHECK(steps_for(2.0, 0.3) == 7);
}

TEST_CASE("finest level tracks the exact flow") {
    auto spec = quadratic_ladder(0.1, 2.0, 6);
    auto fine = run_level(spec, 6);
    auto c = make_squared_euclidean();
    double bound = 2 * 0.1 / 64 * 0.5 * 2;
    for (double t : checkpoint_grid(2.0, 21)) {
        auto x = fine.trajectory().interpolate(t);
        CHECK(c(x, Point::euclidean({std::exp(-t)})) <= bound);
    }
}

TEST_CASE("cauchy estimate") {
    auto spec = quadratic_ladder(0.5, 2.0, 3);
    auto ladder = dyadic_ladder(spec);
    auto c = make_squared_euclidean();
    auto self = cauchy_gap(ladder.runs[0], ladder.runs[0], c, spec.energy, {0.5, 1.0, 2.0});
    CHECK(self.passed());
    auto r = cauchy_gap(ladder.runs[0], ladder.runs[3], c, spec.energy, {0.5, 1.0, 2.0});
    CHECK(r.passed());
    CHECK(r.worst_residual <= 0.0);
    CHECK(ladder_cauchy(ladder, c, spec.energy).passed());

    auto kl = make_kl();
    LadderSpec ks;
    ks.kind = SchemeKind::splitting;
    DensityBounds b{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.2, 5.0};
    ks.energy = SplitEnergy{make_linear({0.5, 0.0, -0.5}), restrict_to_bounds(make_entropy(b.reference), b), 0.0,
                            1.0, 1e9};
    ks.cost = kl;
    ks.tau = 0.1;
    ks.x0 = Point::density({0.6, 0.3, 0.1});
    ks.horizon = 1.0;
    ks.depth = 2;
    ks.solvers = SchemeSolvers{SolverSpec::numeric(1e-12), SolverSpec::closed_form(), SolverSpec::closed_form(), {}};
    // KL is not symmetric, so the splitting form refuses it
    auto kladder = dyadic_ladder(ks);
    CHECK_THROWS_AS(cauchy_gap(kladder.runs[0], kladder.runs[2], kl, ks.energy, {0.5, 1.0}), ContractError);
}

TEST_CASE("cauchy needs a decomposition") {
    auto spec = quadratic_ladder(0.5, 1.0, 1);
    auto ladder = dyadic_ladder(spec);
    auto c = make_bregman_quadratic();
    CHECK_THROWS_AS(cauchy_gap(ladder.runs[0], ladder.runs[1], c, spec.energy, {0.5, 1.0}), ContractError);
}

TEST_CASE("error against the exact flow") {
    auto c = make_squared_euclidean();
    auto run = run_implicit(make_quadratic(1.0), c, 0.1, Point::euclidean({1.0}), 50, closed());
    auto exact = [](double t) { return Point::euclidean({std::exp(-t)}); };
    auto r = error_vs_reference(run, exact, c, 0.5, 0.0, checkpoint_grid(5.0, 51));
    CHECK(r.passed());
    // (1/1.1)^10 against e^-1
    double gap = c(run.trajectory().interpolate(1.0), exact(1.0));
    CHECK(gap >= 1e-4);
    CHECK(gap <= 2e-4);
    CHECK(gap == doctest::Approx(0.5 * std::pow(std::pow(1 / 1.1, 10) - std::exp(-1.0), 2)));
    CHECK(c(run.trajectory().interpolate(0.0), exact(0.0)) == 0.0);
}

TEST_CASE("discrete EVI and the overstated modulus") {
    auto c = make_squared_euclidean();
    auto run = run_implicit(make_quadratic(1.0), c, 0.1, Point::euclidean({1.0}), 20, closed());
    auto pts = uniform_grid_1d(-2.0, 2.0, 11);
    SplitEnergy good{make_zero_energy(), make_quadratic(1.0), 0.0, 1.0, 1e9};
    std::vector<std::vector<double>> heat;
    auto r = discrete_evi_residual(run, c, good, pts, std::nullopt, &heat);
    CHECK(r.passed());
    CHECK(r.worst_residual <= 1e-8);
    CHECK(heat.size() == 20);
    CHECK(heat[0].size() == 11);

    SplitEnergy bad = good;
    bad.lambda_g = 5.0;
    auto neg = discrete_evi_residual(run, c, bad, pts);
    CHECK_FALSE(neg.passed());
    CHECK(neg.worst_residual >= 1e-3);
    CHECK_FALSE(neg.violations.empty());
}
