#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "evilab/energy.hpp"
#include "evilab/error.hpp"

using namespace evilab;

TEST_CASE("eval_phi") {
    SplitEnergy se{make_zero_energy(), make_quadratic(1.0), 0.0, 1.0, 1.0};
    CHECK(eval_phi(se, Point::euclidean({2.0})) == ExtReal(2.0));

    SplitEnergy boxed{make_zero_energy(), restrict_to_box(make_quadratic(1.0), -1.0, 1.0), 0.0, 0.0, 1.0};
    CHECK(eval_phi(boxed, Point::euclidean({2.0})).is_infinite());
    CHECK_THROWS_AS(boxed.g.at(Point::euclidean({2.0})), DomainError);

    SplitEnergy lin{make_linear({1.0, -1.0}), make_zero_energy(), 0.0, 0.0, 1.0};
    CHECK(eval_phi(lin, Point::density({0.5, 0.5})) == ExtReal(0.0));
}

TEST_CASE("extended reals order infinity last") {
    CHECK(ExtReal(1e308) < ExtReal::infinity());
    CHECK((ExtReal(1.0) + ExtReal::infinity()).is_infinite());
    CHECK(ExtReal::infinity() == ExtReal::infinity());
    CHECK_THROWS_AS(ExtReal::infinity().value(), DomainError);
}

TEST_CASE("split energy validation") {
    SplitEnergy se{make_zero_energy(), make_zero_energy(), -1.0, 0.0, 1.0};
    CHECK_THROWS_AS(se.validate(), DomainError);
    se.lambda_f = 0.0;
    se.tau_bar = 0.0;
    CHECK_THROWS_AS(se.validate(), DomainError);
}

TEST_CASE("lower bounds hold on samples") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (const auto& e : {make_zero_energy(), make_quadratic(2.0), make_quartic(1.0), make_smooth_abs(0.1),
                          make_abs()}) {
        REQUIRE(e.lower_bound.has_value());
        for (int i = 0; i < 100; ++i) CHECK(e.at(Point::euclidean({u(rng), u(rng)})) >= *e.lower_bound);
    }
    auto ent = make_entropy({0.25, 0.25, 0.5});
    REQUIRE(ent.lower_bound.has_value());
    CHECK(ent.at(Point::density({0.25, 0.25, 0.5})) == 0.0);
    CHECK(ent.at(Point::density({0.5, 0.25, 0.25})) >= 0.0);
}

TEST_CASE("gradients match central differences") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& e : {make_quadratic(1.5), make_linear({0.3, -2.0}), make_quartic(0.5), make_smooth_abs(0.2)}) {
        REQUIRE(e.gradient);
        for (int i = 0; i < 100; ++i) {
            auto x = Point::euclidean({u(rng), u(rng)});
            auto g = e.gradient(x);
            auto fd = numeric_gradient(e.evaluate, x, 1e-5);
            for (std::size_t k = 0; k < g.size(); ++k)
                CHECK(std::abs(g[k] - fd[k]) <= 1e-6 * std::max(1.0, std::abs(g[k])));
        }
    }
}

TEST_CASE("phi_energy merges parts") {
    SplitEnergy qq{make_quadratic(0.5), make_quadratic(0.5), 0.5, 0.5, 2.0};
    auto phi = phi_energy(qq);
    CHECK(phi.descriptor.kind == EnergyKind::quadratic);
    CHECK(phi.descriptor.k == doctest::Approx(1.0));
    CHECK(phi.at(Point::euclidean({2.0})) == doctest::Approx(2.0));

    SplitEnergy zg{make_zero_energy(), make_abs(), 0.0, 0.0, 1.0};
    CHECK(phi_energy(zg).descriptor.kind == EnergyKind::abs);

    SplitEnergy mixed{make_linear({1.0}), make_quadratic(1.0), 0.0, 1.0, 1.0};
    auto m = phi_energy(mixed);
    CHECK(m.at(Point::euclidean({2.0})) == doctest::Approx(4.0));
}
