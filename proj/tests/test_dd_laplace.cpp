#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "ddlab/bm_analytic.hpp"
#include "ddlab/dd_laplace.hpp"
#include "doctest.h"

using namespace ddlab;

namespace {
const DiffusionModel kBmHalf = DiffusionModel::brownian(0.5, 1.0);
const DiffusionModel kBmZero = DiffusionModel::brownian(0.0, 1.0);
}  // namespace

TEST_CASE("laplace_equal: symmetric small-lambda limit") {
    CHECK(laplace_equal(kBmZero, 0.0, 1.0, 1e-10) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("laplace_equal matches the closed form") {
    const double numeric = laplace_equal(kBmHalf, 0.0, 1.0, 0.5);
    const double closed = bm_laplace_equal({0.5, 1.0}, 1.0, 0.5);
    CHECK(numeric == doctest::Approx(closed).epsilon(1e-5));
}

TEST_CASE("h_factor: empty integral, closed form, frozen value") {
    CHECK(h_factor(kBmHalf, 0.3, 1.0, 0.3, 0.7) == 1.0);

    // exp[T(lambda; b) (u - c)] for Brownian motion
    for (double mu : {-0.4, 0.0, 0.5}) {
        const auto m = DiffusionModel::brownian(mu, 1.0);
        const double t = t_lambda({mu, 1.0}, 0.5, 1.0);
        const double got = h_factor(m, 0.6, 1.0, -0.4, 0.5);
        CHECK(got == doctest::Approx(std::exp(t * 1.0)).epsilon(1e-5));
    }

    // mu=0, b=1, lambda=0.5, u-c=1 -> exp(-coth(1)) ~ 0.2690
    CHECK(h_factor(kBmZero, 0.5, 1.0, -0.5, 0.5) == doctest::Approx(0.2690).epsilon(1e-3));
    CHECK(h_factor(kBmZero, 0.5, 1.0, -0.5, 0.5) ==
          doctest::Approx(std::exp(-std::cosh(1.0) / std::sinh(1.0))).epsilon(1e-5));
}

TEST_CASE("h_factor stays in (0, 1]") {
    const auto ou = DiffusionModel::ornstein_uhlenbeck(0.0, 1.0, 1.0);
    for (double u : {-0.3, 0.0, 0.4}) {
        const double h = h_factor(ou, u, 0.8, u - 0.7, 1.0);
        CHECK(h > 0.0);
        CHECK(h <= 1.0 + 1e-12);
    }
}

TEST_CASE("laplace_dd_larger: continuity at b -> a and closed form") {
    const double near = laplace_dd_larger(kBmHalf, 0.0, 1.0, 1.0 * (1.0 - 1e-6), 0.5);
    const double equal = laplace_equal(kBmHalf, 0.0, 1.0, 0.5);
    CHECK(near == doctest::Approx(equal).epsilon(1e-4));

    const double numeric = laplace_dd_larger(kBmHalf, 0.0, 1.5, 1.0, 0.5);
    const double closed = bm_laplace_dd_larger({0.5, 1.0}, 1.5, 1.0, 0.5);
    CHECK(numeric == doctest::Approx(closed).epsilon(1e-5));
}

TEST_CASE("laplace_dd_uncond: driftless closed form and J0 oracle") {
    // 1/cosh(sqrt(2*0.5)*1)
    CHECK(laplace_dd_uncond(kBmZero, 0.0, 1.0, 0.5) ==
          doctest::Approx(1.0 / std::cosh(1.0)).epsilon(1e-5));
    CHECK(laplace_dd_uncond(kBmZero, 0.0, 1.0, 0.5) == doctest::Approx(0.64805).epsilon(1e-4));

    CHECK(laplace_dd_uncond(kBmHalf, 0.0, 1.0, 1.0) ==
          doctest::Approx(bm_J0({0.5, 1.0}, 1.0, 1.0)).epsilon(1e-5));

    // recurrent model: T_D(a) finite a.s., so the transform tends to one
    CHECK(laplace_dd_uncond(kBmZero, 0.0, 1.0, 1e-8) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("laplace_du_larger: continuity, wide-b limit, closed form") {
    const double near = laplace_du_larger(kBmHalf, 0.0, 1.0, 1.0 * (1.0 + 1e-6), 0.5);
    const double equal = laplace_equal(kBmHalf, 0.0, 1.0, 0.5);
    CHECK(near == doctest::Approx(equal).epsilon(1e-4));

    const double wide = laplace_du_larger(kBmHalf, 0.0, 1.0, 20.0, 0.5);
    const double uncond = laplace_dd_uncond(kBmHalf, 0.0, 1.0, 0.5);
    CHECK(wide == doctest::Approx(uncond).epsilon(1e-6));

    const auto m = DiffusionModel::brownian(-0.3, 1.0);
    const double numeric = laplace_du_larger(m, 0.0, 1.0, 1.5, 0.5);
    const double closed = bm_laplace_du_larger({-0.3, 1.0}, 1.0, 1.5, 0.5);
    CHECK(numeric == doctest::Approx(closed).epsilon(1e-5));
}

TEST_CASE("dispatch routes on the sign of a - b") {
    CHECK(laplace_ddu(kBmHalf, 0.0, 1.0, 1.0, 0.5) ==
          laplace_equal(kBmHalf, 0.0, 1.0, 0.5));
    CHECK(laplace_ddu(kBmHalf, 0.0, 1.2, 1.0, 0.5) ==
          laplace_dd_larger(kBmHalf, 0.0, 1.2, 1.0, 0.5));
    CHECK(laplace_ddu(kBmHalf, 0.0, 1.0, 1.2, 0.5) ==
          laplace_du_larger(kBmHalf, 0.0, 1.0, 1.2, 0.5));
}

TEST_CASE("precede_probability: symmetry and drift sign") {
    CHECK(precede_probability(kBmZero, 0.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(2e-4));
    CHECK(precede_probability(kBmHalf, 0.0, 1.0, 1.0) < 0.5);

    // closed-form reference at the same tiny lambdas
    const BmParams p{0.5, 1.0};
    const double l1 = bm_laplace_equal(p, 1.0, 1e-10);
    const double l2 = bm_laplace_equal(p, 1.0, 2e-10);
    const double l4 = bm_laplace_equal(p, 1.0, 4e-10);
    const double ref = (4.0 * (2.0 * l1 - l2) - (2.0 * l2 - l4)) / 3.0;
    CHECK(precede_probability(kBmHalf, 0.0, 1.0, 1.0) == doctest::Approx(ref).epsilon(1e-4));
}

TEST_CASE("transform bounds and monotonicity in lambda, a and b") {
    const auto ou = DiffusionModel::ornstein_uhlenbeck(0.0, 1.0, 1.0);
    double prev = 1.5;
    for (double lambda : {0.1, 0.5, 1.5, 4.0}) {
        const double v = laplace_ddu(ou, 0.1, 0.6, 0.8, lambda);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v < prev);
        prev = v;
    }
    // non-decreasing in b: a wider drawup threshold enlarges the event
    // {T_D(a) < T_U(b)}, growing toward the unconditional transform
    prev = -1.0;
    for (double b : {0.5, 0.7, 1.0, 1.4}) {
        const double v = laplace_ddu(ou, 0.1, 0.6, b, 0.8);
        CHECK(v >= prev - 1e-7);
        prev = v;
    }
    // non-increasing in a
    prev = 1.5;
    for (double a : {0.4, 0.6, 0.9, 1.2}) {
        const double v = laplace_ddu(ou, 0.1, a, 0.8, 0.8);
        CHECK(v <= prev + 1e-7);
        prev = v;
    }
    // constrained expectation never exceeds the unconditional one
    for (double b : {0.5, 0.9, 1.3}) {
        CHECK(laplace_ddu(ou, 0.1, 0.6, b, 0.8) <=
              laplace_dd_uncond(ou, 0.1, 0.6, 0.8) + 1e-7);
    }
}

TEST_CASE("general pipeline reproduces closed forms on the acceptance-style grid") {
    // light version of the full grid: one lambda per shape
    for (double mu : {-0.5, 0.0, 0.5}) {
        const auto m = DiffusionModel::brownian(mu, 1.0);
        const BmParams p{mu, 1.0};
        CHECK(laplace_ddu(m, 0.0, 1.0, 1.0, 1.0) ==
              doctest::Approx(bm_laplace_ddu(p, 1.0, 1.0, 1.0)).epsilon(1e-5));
        CHECK(laplace_ddu(m, 0.0, 1.5, 1.0, 0.5) ==
              doctest::Approx(bm_laplace_ddu(p, 1.5, 1.0, 0.5)).epsilon(1e-5));
        CHECK(laplace_ddu(m, 0.0, 1.0, 1.5, 2.0) ==
              doctest::Approx(bm_laplace_ddu(p, 1.0, 1.5, 2.0)).epsilon(1e-5));
    }
}

TEST_CASE("query validation") {
    CHECK_THROWS_AS(laplace_equal(kBmZero, 0.0, -1.0, 0.5), ValidationError);
    CHECK_THROWS_AS(laplace_equal(kBmZero, 0.0, 1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(laplace_dd_larger(kBmZero, 0.0, 1.0, 1.5, 0.5), ValidationError);
    CHECK_THROWS_AS(laplace_du_larger(kBmZero, 0.0, 1.5, 1.0, 0.5), ValidationError);
    CHECK_THROWS_AS(h_factor(kBmZero, 0.0, 1.0, 0.5, 0.5), ValidationError);
    const auto gbm = DiffusionModel::geometric_brownian(0.05, 0.2);
    CHECK_THROWS_AS(laplace_ddu(gbm, 1.0, 1.5, 0.5, 0.5), ValidationError);
    NumericsConfig bad;
    bad.max_subdiv = 2;
    CHECK_THROWS_AS(laplace_equal(kBmZero, 0.0, 1.0, 0.5, bad), ValidationError);
}
