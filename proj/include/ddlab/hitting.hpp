#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ddlab/diffusion.hpp"
#include "ddlab/errors.hpp"
#include "ddlab/quadrature.hpp"

namespace ddlab::detail {

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const std::complex<double>& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Fundamental pair of the generator equation
//   (sigma^2/2) f'' + mu f' = lambda f
// anchored at y: u(y)=1, u'(y)=0 and v(y)=0, v'(y)=1. All two-barrier
// transforms are ratios of this pair, so one integration sweep serves any
// number of evaluation points.
template <class S>
struct PairSample {
    S u, du, v, dv;
    double log_scale;  // true value = stored value * exp(log_scale)
};

template <class S>
class FundamentalPair {
public:
    FundamentalPair(const DiffusionModel& model, S lambda) : model_(model), lambda_(lambda) {}

    // Values of the pair at each point (sorted ascending, may straddle y).
    // base_steps RK4 steps are spread over the hull proportionally to leg
    // length, one step minimum per leg.
    std::vector<PairSample<S>> integrate(double y, std::span<const double> points,
                                         int base_steps) const {
        std::vector<PairSample<S>> out(points.size());
        const double lo = points.empty() ? y : std::min(y, points.front());
        const double hi = points.empty() ? y : std::max(y, points.back());
        const double span = std::max(hi - lo, 1e-300);

        const PairSample<S> init{S{1}, S{0}, S{0}, S{1}, 0.0};

        // forward leg: y -> points above y
        std::size_t first_above = 0;
        while (first_above < points.size() && points[first_above] < y) ++first_above;
        {
            PairSample<S> st = init;
            double pos = y;
            for (std::size_t i = first_above; i < points.size(); ++i) {
                const double target = points[i];
                advance(st, pos, target, leg_steps(base_steps, target - pos, span));
                pos = target;
                out[i] = st;
            }
        }
        // backward leg: y -> points below y (descending)
        {
            PairSample<S> st = init;
            double pos = y;
            for (std::size_t i = first_above; i-- > 0;) {
                const double target = points[i];
                advance(st, pos, target, leg_steps(base_steps, pos - target, span));
                pos = target;
                out[i] = st;
            }
        }
        return out;
    }

private:
    static int leg_steps(int base_steps, double len, double span) {
        if (len <= 0.0) return 0;
        const double frac = len / span;
        return std::max(1, static_cast<int>(std::lround(base_steps * frac)));
    }

    Coeffs coeffs_checked(double p) const {
        const Coeffs c = model_.coeffs(p);
        if (!std::isfinite(c.mu) || !std::isfinite(c.sigma) || c.sigma <= 0.0) {
            throw NonFiniteCoefficient("coefficient evaluation failed at u=" + std::to_string(p));
        }
        return c;
    }

    void advance(PairSample<S>& st, double from, double to, int steps) const {
        if (steps == 0) return;
        const double h = (to - from) / steps;
        double p = from;
        for (int k = 0; k < steps; ++k) {
            rk4_step(st, p, h);
            p = from + (k + 1) * h;
            renormalize(st);
        }
    }

    // d/dp (f, f') = (f', (2/sigma^2)(lambda f - mu f')), applied to u and v
    // with shared coefficient evaluations.
    void rk4_step(PairSample<S>& st, double p, double h) const {
        const Coeffs c0 = coeffs_checked(p);
        const Coeffs cm = coeffs_checked(p + 0.5 * h);
        const Coeffs c1 = coeffs_checked(p + h);
        const double i0 = 2.0 / (c0.sigma * c0.sigma);
        const double im = 2.0 / (cm.sigma * cm.sigma);
        const double i1 = 2.0 / (c1.sigma * c1.sigma);

        const auto f = [this](double inv, double mu, S fu, S dfu) {
            return inv * (lambda_ * fu - mu * dfu);
        };

        // k1
        const S k1u = st.du, k1du = f(i0, c0.mu, st.u, st.du);
        const S k1v = st.dv, k1dv = f(i0, c0.mu, st.v, st.dv);
        // k2
        const S u2 = st.u + 0.5 * h * k1u, du2 = st.du + 0.5 * h * k1du;
        const S v2 = st.v + 0.5 * h * k1v, dv2 = st.dv + 0.5 * h * k1dv;
        const S k2u = du2, k2du = f(im, cm.mu, u2, du2);
        const S k2v = dv2, k2dv = f(im, cm.mu, v2, dv2);
        // k3
        const S u3 = st.u + 0.5 * h * k2u, du3 = st.du + 0.5 * h * k2du;
        const S v3 = st.v + 0.5 * h * k2v, dv3 = st.dv + 0.5 * h * k2dv;
        const S k3u = du3, k3du = f(im, cm.mu, u3, du3);
        const S k3v = dv3, k3dv = f(im, cm.mu, v3, dv3);
        // k4
        const S u4 = st.u + h * k3u, du4 = st.du + h * k3du;
        const S v4 = st.v + h * k3v, dv4 = st.dv + h * k3dv;
        const S k4u = du4, k4du = f(i1, c1.mu, u4, du4);
        const S k4v = dv4, k4dv = f(i1, c1.mu, v4, dv4);

        const double w = h / 6.0;
        st.u += w * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        st.du += w * (k1du + 2.0 * k2du + 2.0 * k3du + k4du);
        st.v += w * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        st.dv += w * (k1dv + 2.0 * k2dv + 2.0 * k3dv + k4dv);
    }

    // Joint renormalization: only ratios of the pair matter, so scale both
    // solutions down once they grow past 1e100 and track the log factor.
    static void renormalize(PairSample<S>& st) {
        const double m = std::max(std::max(abs_of(st.u), abs_of(st.du)),
                                  std::max(abs_of(st.v), abs_of(st.dv)));
        if (m > 1e100) {
            const double inv = 1.0 / m;
            st.u *= inv;
            st.du *= inv;
            st.v *= inv;
            st.dv *= inv;
            st.log_scale += std::log(m);
        }
    }

    const DiffusionModel& model_;
    S lambda_;
};

// One (x, z) evaluation request against a shared lower anchor y.
struct XZ {
    double x;
    double z;
};

template <class S>
struct EllPoint {
    S down;  // E_x[e^{-lambda tau_y}; tau_y < tau_z]
    S up;    // E_x[e^{-lambda tau_z}; tau_z < tau_y]
};

// Multi-point evaluator of the two-barrier transforms sharing one anchor y.
// Linear shooting at base_steps and 2*base_steps with one Richardson
// extrapolation level. Points may sit slightly outside [y, z]; the ratios
// are then the smooth algebraic continuation used by barrier-side finite
// differences.
template <class S>
class HittingEvaluator {
public:
    HittingEvaluator(const DiffusionModel& model, S lambda, int base_steps = 2048)
        : pair_(model, lambda), base_steps_(base_steps) {}

    std::vector<EllPoint<S>> eval(double y, std::span<const XZ> queries) const {
        std::vector<double> pts;
        pts.reserve(2 * queries.size());
        for (const XZ& q : queries) {
            pts.push_back(q.x);
            pts.push_back(q.z);
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

        const auto coarse = pair_.integrate(y, pts, base_steps_);
        const auto fine = pair_.integrate(y, pts, 2 * base_steps_);

        std::vector<EllPoint<S>> out(queries.size());
        for (std::size_t i = 0; i < queries.size(); ++i) {
            const std::size_t ix = index_of(pts, queries[i].x);
            const std::size_t iz = index_of(pts, queries[i].z);
            const EllPoint<S> lc = assemble(coarse[ix], coarse[iz]);
            const EllPoint<S> lf = assemble(fine[ix], fine[iz]);
            EllPoint<S> r;
            r.down = (16.0 * lf.down - lc.down) / 15.0;
            r.up = (16.0 * lf.up - lc.up) / 15.0;
            check(lc.down, lf.down, r.down);
            check(lc.up, lf.up, r.up);
            out[i] = r;
        }
        return out;
    }

    EllPoint<S> eval_one(double y, double x, double z) const {
        const XZ q{x, z};
        return eval(y, std::span<const XZ>(&q, 1))[0];
    }

private:
    static std::size_t index_of(const std::vector<double>& pts, double p) {
        return static_cast<std::size_t>(
            std::lower_bound(pts.begin(), pts.end(), p) - pts.begin());
    }

    static EllPoint<S> assemble(const PairSample<S>& at_x, const PairSample<S>& at_z) {
        if (abs_of(at_z.v) == 0.0) {
            throw SolveDiverged("degenerate shooting solution: v(z) = 0");
        }
        EllPoint<S> r;
        // ell(x) = [u(x) v(z) - u(z) v(x)] / v(z), with per-point log scales.
        const S bracket = at_x.u - (at_z.u / at_z.v) * at_x.v;
        r.down = bracket * std::exp(at_x.log_scale);
        r.up = (at_x.v / at_z.v) * std::exp(at_x.log_scale - at_z.log_scale);
        return r;
    }

    static void check(const S& coarse, const S& fine, const S& extrapolated) {
        if (!is_finite(extrapolated)) {
            throw SolveDiverged("shooting solve produced non-finite transform");
        }
        const double scale = std::max(1.0, abs_of(extrapolated));
        if (abs_of(fine - coarse) > 1e-5 * scale) {
            throw SolveDiverged("shooting solve failed Richardson convergence check");
        }
    }

    FundamentalPair<S> pair_;
    int base_steps_;
};

// Closed-form two-barrier transform for drifted Brownian motion, valid for
// complex lambda. Written with decaying exponentials only.
template <class S>
S hitting_laplace_bm_t(double mu, double sigma, double y, double z, double x, S lambda) {
    if (x == y) return S{1};
    if (x == z) return S{0};
    const double s2 = sigma * sigma;
    const S s = std::sqrt(2.0 * lambda / s2 + mu * mu / (s2 * s2));
    if (abs_of(s) == 0.0) {
        // mu = 0, lambda = 0: classical ruin probability.
        return S{(z - x) / (z - y)};
    }
    // sinh(A)/sinh(B) = e^{A-B} (1 - e^{-2A}) / (1 - e^{-2B})
    const S A = (z - x) * s;
    const S B = (z - y) * s;
    const S ratio = std::exp(A - B) * (1.0 - std::exp(-2.0 * A)) / (1.0 - std::exp(-2.0 * B));
    return ratio * std::exp(mu * (y - x) / s2);
}

}  // namespace ddlab::detail
