#pragma once

#include <cmath>
#include <complex>
#include <utility>

#include "ddlab/errors.hpp"

namespace ddlab {

// Drifted Brownian motion X_t = x + mu t + sigma W_t.
struct BmParams {
    double mu;
    double sigma;

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
            throw ValidationError("BmParams requires finite mu and sigma > 0");
        }
    }
};

// Truncation and stabilization controls for the density series.
struct DensitySeriesConfig {
    double term_tol = 1e-12;  // relative tail tolerance per anti-diagonal
    int max_order = 60;       // cap on each of the two summation indices
    bool stabilization = true;  // compensated accumulation

    void validate() const {
        if (!(term_tol > 0.0)) throw ValidationError("term_tol must be > 0");
        if (max_order < 8) throw ValidationError("max_order must be >= 8");
    }
};

struct SeriesResult {
    double value = 0.0;
    int m_max = 0;                    // largest first index that contributed
    int n_max = 0;                    // largest second index that contributed
    bool converged = false;
    double condition_estimate = 0.0;  // max |term| / |value|
    bool clamped = false;             // tiny negative value reported as zero
};

namespace detail {

// sqrt(2 lambda / sigma^2 + mu^2 / sigma^4); the decay rate of the
// two-barrier transforms. Valid for complex lambda (principal branch).
template <class S>
S s_lambda_t(const BmParams& p, S lambda) {
    const double s2 = p.sigma * p.sigma;
    return std::sqrt(2.0 * lambda / s2 + (p.mu * p.mu) / (s2 * s2));
}

template <class S>
S coth(S x) {
    // (1 + e^{-2x}) / (1 - e^{-2x}), decaying exponentials only
    const S e = std::exp(-2.0 * x);
    return (1.0 + e) / (1.0 - e);
}

template <class S>
S t_lambda_t(const BmParams& p, S lambda, double b) {
    const double s2 = p.sigma * p.sigma;
    const S s = s_lambda_t(p, lambda);
    return -p.mu / s2 - s * coth(b * s);
}

// Equal-size transform E[e^{-lambda T_D(a)}; T_D(a) < T_U(a)] started at the
// origin. The bracket carries mu/sigma^2 (see README numerical notes).
template <class S>
S bm_laplace_equal_t(const BmParams& p, double a, S lambda) {
    const double s2 = p.sigma * p.sigma;
    const S s = s_lambda_t(p, lambda);
    const S as = a * s;
    const S em = std::exp(-2.0 * as);
    // sinh(as) = e^{as} (1 - e^{-2as})/2, evaluated via decaying exponentials:
    // 1/sinh(as)   = 2 e^{-as} / (1 - e^{-2as})
    // 1/sinh^2(as) = 4 e^{-2as} / (1 - e^{-2as})^2
    const S one_m = 1.0 - em;
    const S inv_sinh = 2.0 * std::exp(-as) / one_m;
    const S inv_sinh2 = inv_sinh * inv_sinh;
    const S brace = std::exp(-p.mu * a / s2) * (s * coth(as) + p.mu / s2) * inv_sinh -
                    s * inv_sinh2;
    return s / (2.0 * lambda / s2) * brace;
}

template <class S>
S bm_laplace_dd_larger_t(const BmParams& p, double a, double b, S lambda) {
    return bm_laplace_equal_t(p, b, lambda) * std::exp(t_lambda_t(p, lambda, b) * (a - b));
}

template <class S>
S bm_j0_t(const BmParams& p, double a, S lambda) {
    const double s2 = p.sigma * p.sigma;
    const S s = s_lambda_t(p, lambda);
    const S as = a * s;
    // denominator written as e^{as} [s (1+e^{-2as}) - (mu/s2)(1-e^{-2as})] / 2
    const S em = std::exp(-2.0 * as);
    const S den = (s * (1.0 + em) - (p.mu / s2) * (1.0 - em)) / 2.0;
    return s * std::exp(-p.mu * a / s2 - as) / den;
}

template <class S>
S bm_laplace_du_larger_t(const BmParams& p, double a, double b, S lambda) {
    const BmParams flipped{-p.mu, p.sigma};
    const S miss = bm_laplace_equal_t(flipped, a, lambda) *
                   std::exp(t_lambda_t(flipped, lambda, a) * (b - a));
    return (1.0 - miss) * bm_j0_t(p, a, lambda);
}

template <class S>
S bm_laplace_ddu_t(const BmParams& p, double a, double b, S lambda) {
    if (a == b) return bm_laplace_equal_t(p, a, lambda);
    if (a > b) return bm_laplace_dd_larger_t(p, a, b, lambda);
    return bm_laplace_du_larger_t(p, a, b, lambda);
}

// e^c * Phi(w) without overflow; pairs of these evaluate the series'
// exponential-times-normal-cdf blocks.
double exp_phi(double c, double w);

// e^c * (Phi(w_a) - Phi(w_b)), stable when e^c alone would overflow.
double phi_diff_exp(double c, double w_a, double w_b);

// scaled complementary error function e^{x^2} erfc(x), x >= 0
double erfcx(double x);

}  // namespace detail

// S_{mu,sigma}(lambda) of the closed forms.
double s_lambda(const BmParams& p, double lambda);

// Exponential decay rate per unit of extra drawdown width; always negative
// for lambda > 0.
double t_lambda(const BmParams& p, double lambda, double b);

// E[e^{-lambda T_D(a)}; T_D(a) < T_U(a)]
double bm_laplace_equal(const BmParams& p, double a, double lambda);

// a > b: equal-size transform at width b times the exponential widening factor
double bm_laplace_dd_larger(const BmParams& p, double a, double b, double lambda);

// E[e^{-lambda T_D(a)}], no drawup constraint
double bm_J0(const BmParams& p, double a, double lambda);

// b > a
double bm_laplace_du_larger(const BmParams& p, double a, double b, double lambda);

// dispatch on the sign of a - b
double bm_laplace_ddu(const BmParams& p, double a, double b, double lambda);

// k-th derivative of the standard normal density, via the Hermite recurrence.
double normal_pdf_deriv(int k, double x);

// Defective density p(t; a, b) of T_D(a) on {T_D(a) < T_U(b)}, a >= b.
SeriesResult density_dd_precedes(const BmParams& p, double a, double b, double t,
                                 const DensitySeriesConfig& cfg = {});

// Joint density in (t, z) of (T_D(a), sup of the drawup before T_D(a) - a).
SeriesResult density_joint_sup_du(const BmParams& p, double a, double z, double t,
                                  const DensitySeriesConfig& cfg = {});

// Density of T_D(a) on {T_D(a) < T_U(b)} for any a, b > 0.
SeriesResult density_ddu(const BmParams& p, double a, double b, double t,
                         const DensitySeriesConfig& cfg = {});

}  // namespace ddlab
