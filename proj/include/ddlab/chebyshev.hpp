#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

#include "ddlab/quadrature.hpp"

namespace ddlab::detail {

// Degree-16 Chebyshev-Lobatto interpolant of a smooth function on [lo,hi],
// with an exact antiderivative in the same basis. Used for cumulative
// integrals that have to be queried at arbitrary interior points.
template <class S>
struct ChebSeries {
    static constexpr int kN = 16;  // nodes = kN + 1

    double lo = 0.0, hi = 0.0;
    std::array<S, kN + 2> coef{};  // f = sum coef[k] T_k, one spare slot

    double half_width() const { return 0.5 * (hi - lo); }

    // Clenshaw recurrence.
    S eval(double x) const {
        const double t = (2.0 * x - lo - hi) / (hi - lo);
        S b1{}, b2{};
        for (int k = kN + 1; k >= 1; --k) {
            const S b0 = coef[k] + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        return coef[0] + t * b1 - b2;
    }

    // Antiderivative with F(lo) = 0.
    ChebSeries antiderivative() const {
        ChebSeries F;
        F.lo = lo;
        F.hi = hi;
        const double h = half_width();
        for (int k = 1; k <= kN + 1; ++k) {
            const S lower = (k == 1) ? 2.0 * coef[0] : coef[k - 1];
            const S upper = (k + 1 <= kN + 1) ? coef[k + 1] : S{};
            F.coef[k] = h * (lower - upper) / (2.0 * k);
        }
        F.coef[0] = S{};
        F.coef[0] = -F.eval(lo);
        return F;
    }

    // Size of the trailing coefficients, the usual truncation-error gauge.
    double tail() const { return abs_of(coef[kN - 1]) + abs_of(coef[kN]); }

    double max_coef() const {
        double m = 0.0;
        for (const auto& c : coef) m = std::max(m, abs_of(c));
        return m;
    }
};

// Node j of the (kN+1)-point Chebyshev-Lobatto grid on [lo,hi], j = 0 at hi.
inline double cheb_node(int j, double lo, double hi) {
    constexpr int N = ChebSeries<double>::kN;
    const double t = std::cos(j * M_PI / N);
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
}

template <class S>
ChebSeries<S> cheb_fit_values(const std::array<S, ChebSeries<S>::kN + 1>& vals, double lo,
                              double hi) {
    constexpr int N = ChebSeries<S>::kN;
    ChebSeries<S> s;
    s.lo = lo;
    s.hi = hi;
    for (int k = 0; k <= N; ++k) {
        S acc = 0.5 * (vals[0] + (k % 2 == 0 ? vals[N] : -vals[N]));
        for (int j = 1; j < N; ++j) acc += vals[j] * std::cos(k * j * M_PI / N);
        s.coef[k] = acc * (2.0 / N);
    }
    s.coef[0] *= 0.5;
    s.coef[N] *= 0.5;
    s.coef[N + 1] = S{};
    return s;
}

template <class S, class F>
ChebSeries<S> cheb_fit(F&& f, double lo, double hi) {
    constexpr int N = ChebSeries<S>::kN;
    std::array<S, N + 1> vals;
    for (int j = 0; j <= N; ++j) vals[j] = f(cheb_node(j, lo, hi));
    return cheb_fit_values(vals, lo, hi);
}

}  // namespace ddlab::detail
