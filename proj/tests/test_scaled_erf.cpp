#include <catch2/catch_amalgamated.hpp>

#include "treetangent/rng.hpp"
#include "treetangent/scaled_erf.hpp"

#include "oracles.hpp"

using treetangent::CounterRng;
using treetangent::ScaledErf;

TEST_CASE("sigma at zero is exactly one half") {
    REQUIRE(ScaledErf(2.0).value(0.0) == 0.5);
    REQUIRE(ScaledErf(0.1).value(0.0) == 0.5);
}

TEST_CASE("sigma saturates to the limits") {
    const ScaledErf f(1.5);
    REQUIRE(f.value(1e3) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(f.value(-1e3) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("sigma matches the high-precision erf oracle") {
    const ScaledErf f(1.0);
    const double expected = static_cast<double>(0.5L * oracles::erf_series(1.0L) + 0.5L);
    REQUIRE(f.value(1.0) == Catch::Approx(expected).margin(1e-12));

    const ScaledErf g(2.5);
    for (double p : {-1.3, -0.2, 0.7, 1.9}) {
        const double want = static_cast<double>(0.5L * oracles::erf_series(2.5L * p) + 0.5L);
        REQUIRE(g.value(p) == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("rotational symmetry about (0, 1/2)") {
    const CounterRng rng(7);
    for (double alpha : {0.5, 2.0, 8.0}) {
        const ScaledErf f(alpha);
        for (int k = 0; k < 50; ++k) {
            const double p = 3.0 * rng.normal(k);
            REQUIRE(f.value(p) + f.value(-p) == Catch::Approx(1.0).margin(1e-15));
        }
    }
}

TEST_CASE("sigma is monotone increasing") {
    const ScaledErf f(2.0);
    const CounterRng rng(11);
    for (int k = 0; k < 50; ++k) {
        const double a = rng.normal(2 * k), b = rng.normal(2 * k + 1);
        const double lo = std::min(a, b), hi = std::max(a, b);
        if (lo == hi) continue;
        REQUIRE(f.value(lo) < f.value(hi));
    }
}

TEST_CASE("deriv agrees with finite differences of value") {
    const ScaledErf f(3.0);
    const double h = 1e-6;
    for (double p : {-0.8, 0.0, 0.3, 1.1}) {
        const double fd = (f.value(p + h) - f.value(p - h)) / (2 * h);
        REQUIRE(f.deriv(p) == Catch::Approx(fd).margin(1e-8));
    }
}

TEST_CASE("alpha must be positive and finite") {
    REQUIRE_THROWS_AS(ScaledErf(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(ScaledErf(-2.0), std::invalid_argument);
    REQUIRE_THROWS_AS(ScaledErf(std::nan("")), std::invalid_argument);
}
