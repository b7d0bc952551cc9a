#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "ddlab/chebyshev.hpp"
#include "ddlab/quadrature.hpp"
#include "doctest.h"

using namespace ddlab;

TEST_CASE("adaptive quadrature on smooth functions") {
    const double v = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12, 200);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-12));

    const double g = integrate_adaptive([](double x) { return std::exp(-x * x); }, -8.0, 8.0,
                                        1e-12, 200);
    CHECK(g == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature handles reversed limits and zero length") {
    const double fwd = integrate_adaptive([](double x) { return x * x; }, 0.0, 2.0, 1e-12, 200);
    const double rev = integrate_adaptive([](double x) { return x * x; }, 2.0, 0.0, 1e-12, 200);
    CHECK(fwd == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
    CHECK(rev == doctest::Approx(-8.0 / 3.0).epsilon(1e-13));
    CHECK(integrate_adaptive([](double x) { return x; }, 1.0, 1.0, 1e-12, 200) == 0.0);
}

TEST_CASE("adaptive quadrature throws on subdivision cap") {
    // needle the rule cannot resolve with 8 panels
    const auto f = [](double x) { return 1.0 / (1e-8 + x * x); };
    CHECK_THROWS_AS(integrate_adaptive(f, -1.0, 1.0, 1e-12, 8), QuadratureFailed);
}

TEST_CASE("complex-valued quadrature integrates componentwise") {
    const auto f = [](double x) { return std::complex<double>(std::cos(x), std::sin(x)); };
    const std::complex<double> v = integrate_adaptive(f, 0.0, M_PI_2, 1e-12, 200);
    CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.imag() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Chebyshev panel fit evaluates and integrates exponentials") {
    const auto s = detail::cheb_fit<double>([](double x) { return std::exp(x); }, -0.5, 1.5);
    CHECK(s.eval(0.3) == doctest::Approx(std::exp(0.3)).epsilon(1e-13));
    CHECK(s.tail() < 1e-12);

    const auto F = s.antiderivative();
    CHECK(F.eval(-0.5) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(F.eval(1.2) == doctest::Approx(std::exp(1.2) - std::exp(-0.5)).epsilon(1e-13));
}

TEST_CASE("Chebyshev antiderivative matches quadrature for an oscillatory kernel") {
    const auto f = [](double x) { return std::cos(3.0 * x) + 0.25 * x; };
    const auto F = detail::cheb_fit<double>(f, 0.0, 1.0).antiderivative();
    for (double w : {0.1, 0.45, 0.9}) {
        const double ref = integrate_adaptive(f, 0.0, w, 1e-13, 200);
        CHECK(F.eval(w) == doctest::Approx(ref).epsilon(1e-11));
    }
}
