#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ddlab/chebyshev.hpp"
#include "ddlab/diffusion.hpp"
#include "ddlab/errors.hpp"
#include "ddlab/hitting.hpp"
#include "ddlab/quadrature.hpp"

namespace ddlab {

struct NumericsConfig {
    double quad_tol = 1e-9;       // absolute quadrature tolerance
    double diff_step_scale = 1.0; // finite-difference step multiplier
    int max_subdiv = 200;         // quadrature subdivision cap

    void validate() const {
        if (!(quad_tol > 0.0) || !(diff_step_scale > 0.0) || max_subdiv < 8) {
            throw ValidationError("NumericsConfig requires positive tolerances and max_subdiv >= 8");
        }
    }
};

// Query for the drawdown-precedes-drawup transforms.
struct DrawQuery {
    double x;       // start point
    double a;       // drawdown size > 0
    double b;       // drawup size > 0
    double lambda;  // >= 0

    void validate(const DiffusionModel& model) const {
        if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("draw query requires a, b > 0");
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw ValidationError("draw query requires lambda >= 0");
        }
        const StateInterval& iv = model.interval();
        for (double p : {x - a, x + a, x - b, x + b}) {
            if (!iv.contains_closed(p)) {
                throw ValidationError("draw query requires x +- a and x +- b inside the interval");
            }
        }
    }
};

namespace detail {

inline double fd_step(double scale_hint, const NumericsConfig& cfg) {
    constexpr double cbrt_eps = 6.0554544523933429e-6;
    return cfg.diff_step_scale * std::max(1.0, std::fabs(scale_hint)) * cbrt_eps;
}

// Barrier-side and start-side derivatives of the two-barrier transforms.
// Each derivative costs a single fundamental-pair solve because all the
// finite-difference evaluations share the anchor.
template <class S>
class DdKernel {
public:
    DdKernel(const DiffusionModel& model, S lambda, const NumericsConfig& cfg)
        : ev_(model, lambda), cfg_(cfg) {}

    // d/dz ell(y, z; x) at z0, central difference with one Richardson level
    S dz_ell(double y, double z0, double x) const {
        const double h = fd_step(z0 - y, cfg_);
        const XZ q[4] = {{x, z0 + h}, {x, z0 - h}, {x, z0 + 0.5 * h}, {x, z0 - 0.5 * h}};
        const auto l = ev_.eval(y, std::span<const XZ>(q, 4));
        const S d_h = (l[0].down - l[1].down) / (2.0 * h);
        const S d_h2 = (l[2].down - l[3].down) / h;
        return (4.0 * d_h2 - d_h) / 3.0;
    }

    struct WDeriv {
        S down;  // d/dw ell(y, z; w): reach y before z
        S up;    // d/dw of the complementary transform: reach z before y
    };

    // start-point derivatives at w0 for barriers (y, z)
    WDeriv dw_ell(double y, double z, double w0) const {
        const double h = fd_step(w0, cfg_);
        const XZ q[4] = {{w0 + h, z}, {w0 - h, z}, {w0 + 0.5 * h, z}, {w0 - 0.5 * h, z}};
        const auto l = ev_.eval(y, std::span<const XZ>(q, 4));
        WDeriv d;
        {
            const S d_h = (l[0].down - l[1].down) / (2.0 * h);
            const S d_h2 = (l[2].down - l[3].down) / h;
            d.down = (4.0 * d_h2 - d_h) / 3.0;
        }
        {
            const S d_h = (l[0].up - l[1].up) / (2.0 * h);
            const S d_h2 = (l[2].up - l[3].up) / h;
            d.up = (4.0 * d_h2 - d_h) / 3.0;
        }
        return d;
    }

private:
    HittingEvaluator<S> ev_;
    const NumericsConfig& cfg_;
};

inline std::uint64_t key_bits(double x) { return std::bit_cast<std::uint64_t>(x); }

template <class S>
S laplace_equal_t(const DiffusionModel& model, double x, double a, S lambda,
                  const NumericsConfig& cfg) {
    DdKernel<S> ker(model, lambda, cfg);
    const auto integrand = [&](double u) {
        const S v = ker.dz_ell(u, u + a, x);
        if constexpr (std::is_same_v<S, double>) {
            if (v < -cfg.quad_tol) {
                throw NegativeIntegrand(
                    "drawdown landing-density integrand went materially negative");
            }
        }
        return v;
    };
    return integrate_adaptive(integrand, x - a, x, cfg.quad_tol, cfg.max_subdiv);
}

// exponent integrand of the H factor: d/dw ell(v, v+b; w) at w = v
template <class S>
S h_exponent_t(const DdKernel<S>& ker, double c, double u, double b,
               const NumericsConfig& cfg) {
    const auto hd = [&](double v) { return ker.dw_ell(v, v + b, v).down; };
    return integrate_adaptive(hd, c, u, cfg.quad_tol, cfg.max_subdiv);
}

template <class S>
S h_factor_t(const DiffusionModel& model, double u, double b, double c, S lambda,
             const NumericsConfig& cfg) {
    DdKernel<S> ker(model, lambda, cfg);
    return std::exp(h_exponent_t(ker, c, u, b, cfg));
}

template <class S>
S laplace_dd_larger_t(const DiffusionModel& model, double x, double a, double b, S lambda,
                      const NumericsConfig& cfg) {
    DdKernel<S> ker(model, lambda, cfg);
    std::unordered_map<std::uint64_t, S> h_memo;  // per-node cache, call-local
    const auto integrand = [&](double u) {
        const S d = ker.dz_ell(u, u + b, x);
        auto it = h_memo.find(key_bits(u));
        S h;
        if (it != h_memo.end()) {
            h = it->second;
        } else {
            h = std::exp(h_exponent_t(ker, u - a + b, u, b, cfg));
            h_memo.emplace(key_bits(u), h);
        }
        return d * h;
    };
    return integrate_adaptive(integrand, x - b, x, cfg.quad_tol, cfg.max_subdiv);
}

// Cumulative sweep for the unconditional drawdown transform
//   J_w = int_w^{r} (-d/dw ell(u-a, u; w)|_{w=u}) exp(-int_w^u q) du,
//   q(v) = d/dw [reach v before v-a](w)|_{w=v},
// built once per (model, lambda, a) and queryable at every start point the
// wider-drawup decomposition needs. Panels hold Chebyshev antiderivatives of
// the exponent kernel and of the damped integrand, so queries cost no solves.
template <class S>
class JSweep {
public:
    JSweep(const DiffusionModel& model, S lambda, double a, double w_min, double w_max,
           const NumericsConfig& cfg)
        : ker_(model, lambda, cfg) {
        build(model, a, w_min, w_max, cfg);
    }

    S J(double w) const {
        const Panel& p = panel_at(w);
        const S e_rel = p.q_anti.eval(w);
        return std::exp(e_rel) * (p.tail_plus - p.g_anti.eval(w));
    }

private:
    struct Panel {
        double lo, hi;
        ChebSeries<S> q_anti;  // exponent accumulated from lo
        ChebSeries<S> g_anti;  // damped integrand accumulated from lo
        S delta_e;             // q_anti(hi)
        S tail_plus;           // g_anti(hi) + e^{-delta_e} * next.tail_plus
    };

    typename DdKernel<S>::WDeriv kernel(double u, double a) const {
        return ker_.dw_ell(u - a, u, u);
    }

    void build(const DiffusionModel& model, double a, double w_min, double w_max,
               const NumericsConfig& cfg) {
        const double r_end = model.interval().hi;
        constexpr double damp_log = 32.24;  // exp(-32.24) < 1e-14

        double q_scale = abs_of(kernel(w_min, a).up);
        double width = std::clamp(1.5 / std::max(q_scale, 1e-3 / a), a / 8.0, a);

        double u0 = w_min;
        double e_re = 0.0;          // accumulated Re(E) at u0
        double e_re_at_wmax = 0.0;
        bool past_wmax = false;
        int halvings = 0;

        while (true) {
            if (static_cast<int>(panels_.size()) > cfg.max_subdiv) {
                throw TruncationNotConverged(
                    "drawdown transform tail not reached within the panel cap");
            }
            double u1 = std::min(u0 + width, r_end);
            if (u1 <= u0) break;

            constexpr int N = ChebSeries<S>::kN;
            std::array<S, N + 1> qv, gv;
            for (int j = 0; j <= N; ++j) {
                const double u = cheb_node(j, u0, u1);
                const auto d = kernel(u, a);
                qv[j] = d.up;
                gv[j] = -d.down;
            }
            const auto q_series = cheb_fit_values(qv, u0, u1);
            Panel p;
            p.lo = u0;
            p.hi = u1;
            p.q_anti = q_series.antiderivative();
            p.delta_e = p.q_anti.eval(u1);

            const double tol = 1e-9 * std::max(1.0, q_series.max_coef());
            const bool too_wide = abs_of(p.delta_e) > 2.5 || q_series.tail() > tol;
            if (too_wide && (u1 - u0) > 1e-6 * a && halvings < 40) {
                width *= 0.5;
                ++halvings;
                continue;
            }

            for (int j = 0; j <= N; ++j) {
                gv[j] *= std::exp(-p.q_anti.eval(cheb_node(j, u0, u1)));
            }
            const auto g_series = cheb_fit_values(gv, u0, u1);
            p.g_anti = g_series.antiderivative();
            p.tail_plus = S{};
            panels_.push_back(p);

            if (!past_wmax && u1 >= w_max) {
                past_wmax = true;
                e_re_at_wmax = e_re + re_of(p.q_anti.eval(std::min(w_max, u1)));
            }
            e_re += re_of(p.delta_e);
            u0 = u1;

            if (u0 >= r_end) break;
            if (past_wmax && e_re - e_re_at_wmax >= damp_log) break;

            if (abs_of(p.delta_e) < 0.7) width = std::min(width * 1.6, 4.0 * a);
        }

        // suffix tails, far end first
        S tail{};
        for (auto it = panels_.rbegin(); it != panels_.rend(); ++it) {
            it->tail_plus = it->g_anti.eval(it->hi) + std::exp(-it->delta_e) * tail;
            tail = it->tail_plus;
        }
    }

    static double re_of(double x) { return x; }
    static double re_of(const std::complex<double>& z) { return z.real(); }

    const Panel& panel_at(double w) const {
        if (panels_.empty() || w < panels_.front().lo - 1e-12 ||
            w > panels_.back().hi + 1e-12) {
            throw ValidationError("J queried outside its sweep range");
        }
        std::size_t lo = 0, hi = panels_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (panels_[mid].hi < w) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        return panels_[lo];
    }

    DdKernel<S> ker_;
    std::vector<Panel> panels_;
};

template <class S>
S laplace_dd_uncond_t(const DiffusionModel& model, double x, double a, S lambda,
                      const NumericsConfig& cfg) {
    JSweep<S> sweep(model, lambda, a, x, x, cfg);
    return sweep.J(x);
}

template <class S>
S laplace_du_larger_t(const DiffusionModel& model, double x, double a, double b, S lambda,
                      const NumericsConfig& cfg) {
    const DiffusionModel refl = model.reflected(x);
    DdKernel<S> rker(refl, lambda, cfg);
    JSweep<S> sweep(model, lambda, a, x, x + b, cfg);
    const S lead = sweep.J(x);

    std::unordered_map<std::uint64_t, S> h_memo;
    const auto integrand = [&](double v) {
        const double y = 2.0 * x - v;
        const S d = rker.dz_ell(y, y + a, x);
        S h;
        auto it = h_memo.find(key_bits(v));
        if (it != h_memo.end()) {
            h = it->second;
        } else {
            h = std::exp(h_exponent_t(rker, y - b + a, y, a, cfg));
            h_memo.emplace(key_bits(v), h);
        }
        return d * h * sweep.J(v + b - a);
    };
    const S corr = integrate_adaptive(integrand, x, x + a, cfg.quad_tol, cfg.max_subdiv);
    return lead - corr;
}

template <class S>
S laplace_ddu_t(const DiffusionModel& model, double x, double a, double b, S lambda,
                const NumericsConfig& cfg) {
    if (a == b) return laplace_equal_t(model, x, a, lambda, cfg);
    if (a > b) return laplace_dd_larger_t(model, x, a, b, lambda, cfg);
    return laplace_du_larger_t(model, x, a, b, lambda, cfg);
}

}  // namespace detail

// Transforms of the event {T_D(a) < T_U(b)} for a general diffusion. All
// take the start point x and require lambda > 0.

// a = b
double laplace_equal(const DiffusionModel& model, double x, double a, double lambda,
                     const NumericsConfig& cfg = {});

// H_u(lambda; b, c): discounted probability of reaching c from u before a
// drawup of size b, c <= u.
double h_factor(const DiffusionModel& model, double u, double b, double c, double lambda,
                const NumericsConfig& cfg = {});

// a > b
double laplace_dd_larger(const DiffusionModel& model, double x, double a, double b,
                         double lambda, const NumericsConfig& cfg = {});

// E_x[e^{-lambda T_D(a)}], no drawup constraint
double laplace_dd_uncond(const DiffusionModel& model, double x, double a, double lambda,
                         const NumericsConfig& cfg = {});

// b > a
double laplace_du_larger(const DiffusionModel& model, double x, double a, double b,
                         double lambda, const NumericsConfig& cfg = {});

// dispatch on the sign of a - b
double laplace_ddu(const DiffusionModel& model, double x, double a, double b, double lambda,
                   const NumericsConfig& cfg = {});

// P_x(T_D(a) < T_U(b)) by small-lambda Richardson extrapolation
double precede_probability(const DiffusionModel& model, double x, double a, double b,
                           const NumericsConfig& cfg = {});

}  // namespace ddlab
