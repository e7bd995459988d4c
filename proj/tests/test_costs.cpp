#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "evilab/cost.hpp"
#include "evilab/error.hpp"

using namespace evilab;

namespace {

// frozen by hand: 0.5 ln 2 + 0.5 ln(2/3)
constexpr double kKlHalfQuarter = 0.14384103622589045;
constexpr double kLn2 = 0.69314718055994531;

Point random_density(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& v : w) s += (v = e(rng) + 1e-3);
    for (auto& v : w) v /= s;
    double tot = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) tot += w[i];
    w[n - 1] = 1.0 - tot;
    return Point::density(w);
}

}  // namespace

TEST_CASE("distance presets") {
    auto sq = make_squared_euclidean();
    CHECK(sq(Point::euclidean({0.0}), Point::euclidean({2.0})) == 2.0);
    CHECK(sq.symmetric);
    CHECK(sq.dissipative);
    REQUIRE(sq.decomposition.has_value());
    auto p1 = make_power_distance(1.0);
    CHECK(p1(Point::euclidean({1.0, 1.0}), Point::euclidean({1.0, 1.0})) == 0.0);
    auto p3 = make_power_distance(3.0);
    CHECK(p3(Point::euclidean({0.0}), Point::euclidean({2.0})) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK_THROWS_AS(make_power_distance(0.5), DomainError);
}

TEST_CASE("squared euclidean decomposition sums to the cost") {
    auto sq = make_squared_euclidean();
    auto x = Point::euclidean({0.3, -1.2});
    auto y = Point::euclidean({-0.7, 2.0});
    double sum = sq.decomposition->c1(x, y) + sq.decomposition->c2(x, y);
    CHECK(std::abs(sum - sq(x, y)) <= 1e-10);
}

TEST_CASE("bregman presets") {
    auto bq = make_bregman_quadratic();
    CHECK(bq(Point::euclidean({3.0}), Point::euclidean({1.0})) == doctest::Approx(2.0));
    CHECK_FALSE(bq.symmetric);
    CHECK(bq.dissipative);
    auto sq = make_squared_euclidean();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        auto x = Point::euclidean({u(rng), u(rng)});
        auto y = Point::euclidean({u(rng), u(rng)});
        CHECK(std::abs(bq(x, y) - sq(x, y)) <= 1e-12);
        CHECK(bq(x, x) == 0.0);
    }
    auto be = make_bregman_entropy();
    auto mu = Point::density({0.5, 0.5});
    auto nu = Point::density({0.25, 0.75});
    CHECK(be(mu, nu) == doctest::Approx(kKlHalfQuarter).epsilon(1e-12));
    CHECK(be(mu, nu) == doctest::Approx(kl_divergence(mu, nu).value()).epsilon(1e-12));
}

TEST_CASE("kl divergence") {
    auto mu = Point::density({0.5, 0.5});
    auto nu = Point::density({0.25, 0.75});
    CHECK(kl_divergence(mu, mu).value() == 0.0);
    CHECK(kl_divergence(mu, nu).value() == doctest::Approx(kKlHalfQuarter).epsilon(1e-12));
    CHECK(kl_divergence(Point::density({1.0, 0.0}), mu).value() == doctest::Approx(kLn2).epsilon(1e-12));
    CHECK(kl_divergence(mu, Point::density({1.0, 0.0})).is_infinite());
    CHECK_THROWS_AS(kl_divergence(mu, Point::density({0.2, 0.3, 0.5})), ShapeError);
    CHECK_THROWS_AS(make_kl()(mu, Point::density({1.0, 0.0})), DomainError);
}

TEST_CASE("kl is zero on the diagonal and nonnegative") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        auto mu = random_density(rng, 5);
        CHECK(kl_divergence(mu, mu).value() == 0.0);
        auto nu = random_density(rng, 5);
        CHECK(kl_divergence(mu, nu).value() >= 0.0);
    }
}

TEST_CASE("pinsker gap") {
    auto mu = Point::density({0.5, 0.5});
    auto nu = Point::density({0.25, 0.75});
    CHECK(pinsker_gap(mu, mu) == 0.0);
    CHECK(total_variation(mu, nu) == doctest::Approx(0.25));
    CHECK(pinsker_gap(mu, nu) == doctest::Approx(kKlHalfQuarter - 0.125).epsilon(1e-12));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) CHECK(pinsker_gap(random_density(rng, 5), random_density(rng, 5)) >= -1e-12);
}

TEST_CASE("check_dissipative") {
    CHECK(check_dissipative(make_squared_euclidean(), uniform_grid_1d(-1.0, 1.0, 11)).passed());

    CostFn inner;
    inner.label = "inner";
    inner.evaluate = [](const Point& x, const Point& y) { return x[0] * y[0]; };
    auto r = check_dissipative(inner, FiniteSpace({Point::euclidean({-1.0}), Point::euclidean({1.0})}));
    CHECK_FALSE(r.passed());
    CHECK(r.worst_location.test_point.has_value());

    DensityBounds b{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.5, 2.0};
    FiniteSpace sample({Point::density({0.2, 0.3, 0.5}, b), Point::density({1.0 / 3, 1.0 / 3, 1.0 / 3}, b),
                        Point::density({0.6, 0.2, 0.2}, b)});
    CHECK(check_dissipative(make_kl(), sample).passed());
}

TEST_CASE("dissipative presets pass on random samples") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Point> eu, de;
    for (int i = 0; i < 50; ++i) {
        eu.push_back(Point::euclidean({u(rng), u(rng)}));
        de.push_back(random_density(rng, 3));
    }
    FiniteSpace se(eu), sd(de);
    CHECK(check_dissipative(make_squared_euclidean(), se).passed());
    CHECK(check_dissipative(make_power_distance(3.0), se).passed());
    CHECK(check_dissipative(make_bregman_quadratic(), se).passed());
    CHECK(check_dissipative(make_kl(), sd).passed());
    CHECK(check_dissipative(make_bregman_entropy(), sd).passed());
}

TEST_CASE("regularity modulus") {
    auto sq = make_squared_euclidean();
    auto grid = uniform_grid_1d(-0.5, 0.5, 101);
    auto m = regularity_modulus(sq, grid, 0.02, 0.02);
    CHECK_FALSE(m.no_qualifying_triple);
    // |x-p|, |y-p| <= 0.2 so |x-y| <= 0.4 and c <= 0.08
    CHECK(m.value <= 0.08 + 1e-12);
    CHECK(m.value >= 0.07);
    auto tiny = regularity_modulus(sq, grid, 1e-9, 1e-9);
    CHECK(tiny.value == 0.0);
}
