#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evilab/error.hpp"
#include "evilab/evi_checks.hpp"
#include "evilab/schemes.hpp"

using namespace evilab;

namespace {

// frozen: e^-2, e^-1, e - 1
constexpr double kEm2 = 0.1353352832366127;
constexpr double kEm1 = 0.36787944117144233;
constexpr double kEm1Minus = 1.718281828459045;

const std::vector<double> kH{1e-2, 5e-3, 2.5e-3};

ContinuousCurve quadratic_flow(double x0, double T = 10.0) {
    auto c = closed_form_flow(make_quadratic(1.0), make_squared_euclidean(), Point::euclidean({x0}), T);
    REQUIRE(c.has_value());
    return *c;
}

ContinuousCurve stationary(double x) {
    return ContinuousCurve{"stationary", [x](double) { return Point::euclidean({x}); }, 10.0, 0.0};
}

FiniteSpace origin() { return FiniteSpace({Point::euclidean({0.0})}); }

}  // namespace

TEST_CASE("E_lambda") {
    CHECK(E_lambda(0.0, 2.0) == 2.0);
    CHECK(E_lambda(3.0, 0.0) == 0.0);
    CHECK(E_lambda(1.0, 1.0) == doctest::Approx(kEm1Minus).epsilon(1e-14));
    // series branch against expm1
    CHECK(E_lambda(1e-8, 1.0) == doctest::Approx(std::expm1(1e-8) / 1e-8).epsilon(1e-15));
    CHECK(E_lambda(-1.0, 2.0) == doctest::Approx((1 - std::exp(-2.0))).epsilon(1e-14));
    CHECK_THROWS_AS(E_lambda(1.0, -1.0), DomainError);
}

TEST_CASE("closed form flow and horizon") {
    auto q = quadratic_flow(1.0, 5.0);
    CHECK(q(0.0)[0] == 1.0);
    CHECK(q(1.0)[0] == doctest::Approx(kEm1).epsilon(1e-15));
    CHECK_THROWS_AS(q(5.5), HorizonError);
    CHECK_FALSE(closed_form_flow(make_quartic(1.0), make_squared_euclidean(), Point::euclidean({1.0}), 1.0));
}

TEST_CASE("richardson extrapolation") {
    // D = 3 + 2h is extrapolated exactly
    auto e = richardson(kH, {3.02, 3.01, 3.005});
    CHECK(e.value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(e.uncertainty <= 1e-12);
    CHECK_FALSE(e.inconclusive);
    auto bad = richardson(kH, {1.0, 2.0, 1.0});
    CHECK(bad.inconclusive);
    CHECK_THROWS_AS(richardson({1e-2}, {1.0}), ContractError);
}

TEST_CASE("integral form") {
    auto c = make_squared_euclidean();
    auto phi = make_quadratic(1.0);
    auto q = quadratic_flow(1.0);
    auto same = evi_integral_residual(q, c, phi, 1.0, origin(), {{0.7, 0.7}}, 100);
    CHECK(same.passed());
    auto r = evi_integral_residual(q, c, phi, 1.0, origin(), {{0.5, 1.0}}, 10000);
    CHECK(r.passed());
    CHECK(r.worst_residual <= 0.0);
    auto lip = evi_lipschitz_bound(q, c, phi, 1.0, {{0.5, 1.0}, {0.0, 2.0}});
    CHECK(lip.passed());
}

TEST_CASE("exponential form") {
    auto c = make_squared_euclidean();
    auto phi = make_quadratic(1.0);
    auto q = quadratic_flow(1.0);
    auto r = evi_exponential_residual(q, c, phi, 1.0, origin(), {{0.1, 2.0}});
    CHECK(r.passed());
    CHECK(r.worst_residual <= 1e-10);
    auto same = evi_exponential_residual(q, c, phi, 1.0, origin(), {{1.0, 1.0}});
    CHECK(std::abs(same.worst_residual) <= 1e-15);
    // x = x_t: left side -c(x_t, x_s) <= 0
    FiniteSpace xt({q(2.0)});
    auto at = evi_exponential_residual(q, c, phi, 1.0, xt, {{0.1, 2.0}});
    CHECK(at.worst_residual <= 0.0);
    // overstating lambda breaks it
    auto neg = evi_exponential_residual(q, c, phi, 3.0, uniform_grid_1d(-2, 2, 11), {{0.1, 2.0}});
    CHECK_FALSE(neg.passed());
}

TEST_CASE("differential form") {
    auto c = make_squared_euclidean();
    auto phi = make_quadratic(1.0);
    auto r = evi_differential_residual(quadratic_flow(1.0), c, phi, 1.0, origin(), {0.5}, kH);
    CHECK(r.passed());
    // stationary at the minimizer: residual lambda c(x, 0) - phi(x) + phi(0) = 0 for the quadratic
    auto s = evi_differential_residual(stationary(0.0), c, phi, 1.0, uniform_grid_1d(-1, 1, 5), {0.5}, kH);
    CHECK(s.verdict != Verdict::fail);
}

TEST_CASE("lambda contraction") {
    auto c = make_squared_euclidean();
    auto a = quadratic_flow(1.0), b = quadratic_flow(-0.5);
    CHECK(lambda_contraction_gap(a, a, c, 1.0, 0.1, 1.1) == 0.0);
    CHECK(std::abs(lambda_contraction_gap(a, b, c, 1.0, 0.1, 1.1)) <= 1e-9);
    CHECK(std::abs(contraction_ratio(a, b, c, 1.0, 0.1, 1.1) - 1.0) <= 1e-9);
    CHECK(lambda_contraction_check(a, b, c, 1.0, {{0.0, 0.5}, {1.0, 3.0}}).passed());

    LadderSpec spec;
    spec.energy = SplitEnergy{make_zero_energy(), make_quadratic(1.0), 0.0, 1.0, 1e9};
    spec.cost = c;
    // implicit Euler lags e^{-2t} by about (t-s) h, so this needs a fine level
    spec.tau = 0.0625;
    spec.horizon = 2.0;
    spec.x0 = Point::euclidean({1.0});
    auto ra = run_level(spec, 14);
    spec.x0 = Point::euclidean({-0.5});
    auto rb = run_level(spec, 14);
    auto ca = curve_from_trajectory(ra.trajectory(), "ladder"), cb = curve_from_trajectory(rb.trajectory(), "ladder");
    for (auto [s, t] : {std::pair{0.0, 0.5}, {0.5, 1.0}, {1.0, 2.0}}) CHECK(lambda_contraction_gap(ca, cb, c, 1.0, s, t) >= -1e-6);
}

TEST_CASE("c-cost derivative and slope") {
    auto c = make_squared_euclidean();
    auto phi = make_quadratic(1.0);
    auto q = quadratic_flow(1.0);
    auto d = c_cost_derivative(q, c, 1.0, kH);
    CHECK_FALSE(d.inconclusive);
    CHECK(d.value == doctest::Approx(kEm2).epsilon(1e-5));
    auto s = oriented_local_slope(q, phi, c, 1.0, kH);
    CHECK(s.value == doctest::Approx(kEm1).epsilon(1e-2));
    CHECK(std::abs(s.value * s.value - d.value) <= 3 * (d.uncertainty + 2 * s.value * s.uncertainty) + 1e-3);
    auto z = c_cost_derivative(stationary(0.3), c, 1.0, kH);
    CHECK(z.degenerate);
    CHECK(z.value == 0.0);
    CHECK(oriented_local_slope(stationary(0.3), phi, c, 1.0, kH).value == 0.0);
}

TEST_CASE("energy identity and velocity monotonicity") {
    auto c = make_squared_euclidean();
    auto phi = make_quadratic(1.0);
    auto q = quadratic_flow(1.0);
    auto r = energy_identity_gap(q, phi, c, {0.5, 1.0, 2.0}, kH);
    CHECK(r.passed());
    CHECK(velocity_monotonicity(q, c, 1.0, {0.25, 0.5, 1.0, 2.0}, kH).passed());
    auto s = energy_identity_gap(stationary(0.0), phi, c, {0.5, 1.0}, kH);
    CHECK(s.verdict != Verdict::fail);
}

TEST_CASE("a kink leaves the derivative checks inconclusive") {
    // soft thresholding x_t = 1 - t reaches 0 at t = 1 and stops
    auto c = make_squared_euclidean();
    auto phi = make_abs();
    auto flow = closed_form_flow(phi, c, Point::euclidean({1.0}), 3.0);
    REQUIRE(flow.has_value());
    auto r = energy_identity_gap(*flow, phi, c, {0.995}, kH);
    CHECK(r.verdict == Verdict::inconclusive);
}

TEST_CASE("a priori and asymptotic estimates") {
    auto c = make_squared_euclidean();
    auto phi = make_quadratic(1.0);
    auto q = quadratic_flow(1.0);
    CHECK(apriori_gap(q, c, phi, 1.0, origin(), {{0.5, 1.0}, {0.7, 0.7}}, kH).passed());
    auto a = asymptotic_report(q, phi, c, 1.0, Point::euclidean({0.0}), 0.5, {0.5, 1.0, 2.0}, kH);
    CHECK(a.passed());
    // phi(x_2) = e^-4 / 2 against the decay bound quoted for t0 = 0.5
    CHECK(std::exp(-4.0) / 2 <= std::exp(-1.0) / 2 / (std::exp(1.5) - 1));
    auto neg = asymptotic_report(q, phi, c, -1.0, Point::euclidean({0.0}), 0.5, {1.0}, kH);
    CHECK(neg.verdict == Verdict::inconclusive);
}

TEST_CASE("local stationarity") {
    auto q = quadratic_flow(1.0);
    auto phi = make_quadratic(1.0);
    CHECK(local_stationarity_residual(q, make_squared_euclidean(), phi, 1.0, 1e-4) <= 1e-4);
    CHECK(local_stationarity_residual(q, make_bregman_quadratic(), phi, 1.0, 1e-4) <= 1e-4);
    CHECK(local_stationarity_residual(stationary(0.0), make_squared_euclidean(), phi, 1.0, 1e-4) <= 1e-12);
}
