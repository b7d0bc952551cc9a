#include "ddlab/bm_analytic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "ddlab/quadrature.hpp"

namespace ddlab {

namespace detail {

double erfcx(double x) {
    if (x < 6.0) return std::exp(x * x) * std::erfc(x);
    // asymptotic series: erfcx(x) ~ 1/(x sqrt(pi)) sum (-1)^k (2k-1)!!/(2x^2)^k
    const double inv2x2 = 1.0 / (2.0 * x * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 40; ++k) {
        term *= -(2.0 * k - 1.0) * inv2x2;
        sum += term;
        if (std::fabs(term) < 1e-20 * std::fabs(sum)) break;
    }
    return sum / (x * std::sqrt(M_PI));
}

double exp_phi(double c, double w) {
    if (w <= 0.0) {
        return 0.5 * erfcx(-w * M_SQRT1_2) * std::exp(c - 0.5 * w * w);
    }
    return std::exp(c) - 0.5 * erfcx(w * M_SQRT1_2) * std::exp(c - 0.5 * w * w);
}

double phi_diff_exp(double c, double w_a, double w_b) {
    if (w_a >= 0.0 && w_b >= 0.0) {
        // Phi(w_a) - Phi(w_b) = Phi(-w_b) - Phi(-w_a); kills the e^c * 1 parts
        return exp_phi(c, -w_b) - exp_phi(c, -w_a);
    }
    return exp_phi(c, w_a) - exp_phi(c, w_b);
}

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

// Fills out[0..kmax] with the derivatives of the standard normal density at x.
void phi_derivs_upto(int kmax, double x, double* out) {
    const double e = 0.5 * x * x;
    const double p0 = (e > 745.0) ? 0.0 : kInvSqrt2Pi * std::exp(-e);
    out[0] = p0;
    if (kmax >= 1) out[1] = -x * p0;
    for (int k = 1; k < kmax; ++k) {
        out[k + 1] = -(x * out[k] + k * out[k - 1]);
    }
}

double ipow(double x, int m) {
    double r = 1.0;
    for (int i = 0; i < m; ++i) r *= x;
    return r;
}

struct NeumaierSum {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

struct PlainSum {
    double sum = 0.0;
    void add(double x) { sum += x; }
    double value() const { return sum; }
};

// Shared anti-diagonal summation driver. term(m, n, coef) evaluates one term
// given the factorial weight; coef_first(d) and coef_step implement the exact
// weight recurrence along a diagonal.
template <class TermFn, class CoefFirst, class CoefStep>
SeriesResult sum_antidiagonals(const DensitySeriesConfig& cfg, TermFn&& term,
                               CoefFirst&& coef_first, CoefStep&& coef_step) {
    cfg.validate();
    SeriesResult res;
    NeumaierSum acc_c;
    PlainSum acc_p;
    const bool comp = cfg.stabilization;

    auto total = [&] { return comp ? acc_c.value() : acc_p.value(); };

    double max_term = 0.0;
    int quiet = 0, growing = 0;
    double prev_diag = std::numeric_limits<double>::infinity();
    const int d_cap = 2 * cfg.max_order;

    for (int d = 0; d <= d_cap; ++d) {
        double diag_mag = 0.0;
        const int m_lo = std::max(0, d - cfg.max_order);
        const int m_hi = std::min(d, cfg.max_order);
        double coef = coef_first(d, m_lo);
        for (int m = m_lo; m <= m_hi; ++m) {
            const int n = d - m;
            const double v = term(m, n, coef);
            if (!std::isfinite(v)) throw SeriesDiverged("series term is non-finite");
            if (comp) acc_c.add(v); else acc_p.add(v);
            const double av = std::fabs(v);
            diag_mag += av;
            if (av > max_term) {
                max_term = av;
                res.m_max = m;
                res.n_max = n;
            }
            coef = coef_step(m, n, coef);
        }
        if (diag_mag <= cfg.term_tol * std::fabs(total()) + 1e-300) {
            if (++quiet >= 3 && d >= 3) {
                res.converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
        if (diag_mag > prev_diag) {
            if (++growing >= 10) throw SeriesDiverged("series terms grew for 10 diagonals");
        } else {
            growing = 0;
        }
        prev_diag = diag_mag;
    }

    res.value = total();
    res.condition_estimate = (max_term > 0.0 && res.value != 0.0)
                                 ? max_term / std::fabs(res.value)
                                 : 0.0;
    if (res.condition_estimate > 1e12) res.converged = false;

    // Negative-density policy: truncation noise is clamped, anything worse
    // is a genuine failure.
    if (res.value < 0.0) {
        if (res.value >= -10.0 * cfg.term_tol) {
            res.value = 0.0;
            res.clamped = true;
        } else {
            throw SeriesDiverged("density series produced a materially negative value");
        }
    }
    return res;
}

}  // namespace

}  // namespace detail

double s_lambda(const BmParams& p, double lambda) {
    p.validate();
    if (!(lambda >= 0.0)) throw ValidationError("s_lambda requires lambda >= 0");
    return detail::s_lambda_t(p, lambda);
}

double t_lambda(const BmParams& p, double lambda, double b) {
    p.validate();
    if (!(lambda > 0.0) || !(b > 0.0)) throw ValidationError("t_lambda requires lambda, b > 0");
    return detail::t_lambda_t(p, lambda, b);
}

double bm_laplace_equal(const BmParams& p, double a, double lambda) {
    p.validate();
    if (!(a > 0.0) || !(lambda > 0.0)) {
        throw ValidationError("bm_laplace_equal requires a > 0 and lambda > 0");
    }
    return detail::bm_laplace_equal_t(p, a, lambda);
}

double bm_laplace_dd_larger(const BmParams& p, double a, double b, double lambda) {
    p.validate();
    if (!(a >= b) || !(b > 0.0) || !(lambda > 0.0)) {
        throw ValidationError("bm_laplace_dd_larger requires a >= b > 0 and lambda > 0");
    }
    return detail::bm_laplace_dd_larger_t(p, a, b, lambda);
}

double bm_J0(const BmParams& p, double a, double lambda) {
    p.validate();
    if (!(a > 0.0) || !(lambda > 0.0)) throw ValidationError("bm_J0 requires a, lambda > 0");
    return detail::bm_j0_t(p, a, lambda);
}

double bm_laplace_du_larger(const BmParams& p, double a, double b, double lambda) {
    p.validate();
    if (!(b > a) || !(a > 0.0) || !(lambda > 0.0)) {
        throw ValidationError("bm_laplace_du_larger requires b > a > 0 and lambda > 0");
    }
    return detail::bm_laplace_du_larger_t(p, a, b, lambda);
}

double bm_laplace_ddu(const BmParams& p, double a, double b, double lambda) {
    p.validate();
    if (!(a > 0.0) || !(b > 0.0) || !(lambda > 0.0)) {
        throw ValidationError("bm_laplace_ddu requires a, b, lambda > 0");
    }
    return detail::bm_laplace_ddu_t(p, a, b, lambda);
}

double normal_pdf_deriv(int k, double x) {
    if (k < 0 || k > 200) throw ValidationError("normal_pdf_deriv requires 0 <= k <= 200");
    std::vector<double> buf(k + 2);
    detail::phi_derivs_upto(k, x, buf.data());
    return buf[k];
}

SeriesResult density_dd_precedes(const BmParams& p, double a, double b, double t,
                                 const DensitySeriesConfig& cfg) {
    p.validate();
    if (!(a >= b) || !(b > 0.0) || !(t > 0.0)) {
        throw ValidationError("density_dd_precedes requires a >= b > 0 and t > 0");
    }
    const double mu = p.mu, sg = p.sigma;
    const double s2 = sg * sg;
    const double st = sg * std::sqrt(t);
    const double mt = mu * std::sqrt(t) / sg;
    const double pref1 = (2.0 / t) * std::exp(-mu * mu * t / (2.0 * s2) - mu * (a - b) / s2);
    const double pref2 = (2.0 * mu * mu / s2) * std::exp(-mu * (a - b) / s2);
    const double gm = 2.0 * (a - b) / st;
    const double gm2 = 2.0 * mu * (a - b) / s2;
    const double eb = std::exp(-mu * b / s2);

    std::vector<double> pd(64 * 2 + 4);

    auto term = [&](int m, int n, double coef) {
        const double sgn_m = (m % 2 == 0) ? 1.0 : -1.0;

        // F blocks: Gaussian-derivative sums with three distinct arguments
        const double arg1 = ((2.0 * m + 2.0 * n + 1.0) * b + a) / st;
        const double arg2 = (2.0 * (m + n + 1.0) * b + a) / st;
        detail::phi_derivs_upto(m + 1, arg1, pd.data());
        double f1 = 0.0;
        double mt2k = 1.0;
        for (int k = 0; 2 * k <= m + 1; ++k) {
            f1 += mt2k * pd[m + 1 - 2 * k];
            mt2k *= mt * mt;
        }
        detail::phi_derivs_upto(m + 1, arg2, pd.data());
        double f2 = 0.0;
        double mtk = 1.0;
        for (int k = 0; k <= m + 1; ++k) {
            const double parity = (k % 2 == 0) ? 1.0 : -1.0;
            f2 += mtk * (1.0 + parity * (m + n + 2.0) / (n + 1.0)) * pd[m + 1 - k];
            mtk *= mt;
        }
        double f3 = 0.0;
        if (n == 0) {
            const double arg3 = (2.0 * m * b + a) / st;
            detail::phi_derivs_upto(m + 1, arg3, pd.data());
            double nmtk = 1.0;
            for (int k = 0; k <= m + 1; ++k) {
                f3 += nmtk * pd[m + 1 - k];
                nmtk *= -mt;
            }
        }
        const double fpart = pref1 * detail::ipow(gm, m) * (2.0 * f1 - eb * f2 - eb * f3);

        // G blocks, paired so the exponentials cancel within each pair
        double gpart = 0.0;
        if (mu != 0.0) {
            const double big = (2.0 * m + 2.0 * n + 1.0) * b + a;
            const double c = mu * big / s2;
            const double wa1 = (big + mu * t) / st;
            const double wa2 = wa1 + b / st;
            const double wb1 = (big - mu * t) / st;
            const double wb2 = wb1 - b / st;
            const double combo = detail::phi_diff_exp(c, wa1, wa2) +
                                 sgn_m * detail::phi_diff_exp(-c, wb1, wb2);
            gpart = pref2 * detail::ipow(gm2, m) * combo;
        }
        return coef * (fpart + gpart);
    };

    // (m+n+1)!/((m+1)! m! n!): first entry of diagonal d is d+1; stepping
    // (m,n) -> (m+1,n-1) multiplies by n/((m+2)(m+1)).
    auto coef_first = [](int d, int m_lo) {
        double c = d + 1.0;  // value at (0, d)
        for (int m = 0; m < m_lo; ++m) {
            c *= (d - m) / ((m + 2.0) * (m + 1.0));
        }
        return c;
    };
    auto coef_step = [](int m, int n, double c) {
        return c * n / ((m + 2.0) * (m + 1.0));
    };

    if (pd.size() < static_cast<std::size_t>(cfg.max_order) + 4) {
        pd.resize(cfg.max_order + 4);
    }
    return detail::sum_antidiagonals(cfg, term, coef_first, coef_step);
}

SeriesResult density_joint_sup_du(const BmParams& p, double a, double z, double t,
                                  const DensitySeriesConfig& cfg) {
    p.validate();
    if (!(a > 0.0) || !(z > 0.0) || !(t > 0.0)) {
        throw ValidationError("density_joint_sup_du requires a, z, t > 0");
    }
    const double mu = p.mu, sg = p.sigma;
    const double s2 = sg * sg;
    const double st = sg * std::sqrt(t);
    const double mt = mu * std::sqrt(t) / sg;
    const double pref1 =
        -(4.0 / (sg * std::pow(t, 1.5))) * std::exp(-mu * mu * t / (2.0 * s2) + mu * (z - a) / s2);
    const double pref2 = -(4.0 * mu * mu * mu / (s2 * s2)) * std::exp(mu * (z - a) / s2);
    const double gm = 2.0 * z / st;
    const double gm2 = 2.0 * mu * z / s2;
    const double ea = std::exp(mu * a / s2);

    std::vector<double> pd(std::max(64 * 2 + 5, cfg.max_order + 5));

    auto term = [&](int m, int n, double coef) {
        const double sgn_m = (m % 2 == 0) ? 1.0 : -1.0;

        const double arg1 = ((2.0 * m + 2.0 * n + 3.0) * a + z) / st;
        const double arg2 = ((2.0 * m + 2.0 * n + 4.0) * a + z) / st;
        const double arg3 = ((2.0 * m + 2.0) * a + z) / st;
        detail::phi_derivs_upto(m + 2, arg1, pd.data());
        double f1 = 0.0;
        double mt2k = 1.0;
        for (int k = 0; 2 * k <= m + 2; ++k) {
            f1 += mt2k * pd[m + 2 - 2 * k];
            mt2k *= mt * mt;
        }
        detail::phi_derivs_upto(m + 2, arg2, pd.data());
        double f2 = 0.0;
        double mtk = 1.0;
        for (int k = 0; k <= m + 2; ++k) {
            const double parity = (k % 2 == 0) ? 1.0 : -1.0;
            f2 += mtk * (parity + (m + n + 3.0) / (n + 1.0)) * pd[m + 2 - k];
            mtk *= mt;
        }
        double f3 = 0.0;
        if (n == 0) {
            detail::phi_derivs_upto(m + 2, arg3, pd.data());
            double mtk3 = 1.0;
            for (int k = 0; k <= m + 2; ++k) {
                f3 += mtk3 * pd[m + 2 - k];
                mtk3 *= mt;
            }
        }
        const double fpart = pref1 * detail::ipow(gm, m) * (2.0 * f1 - ea * f2 - ea * f3);

        double gpart = 0.0;
        if (mu != 0.0) {
            const double big = (2.0 * m + 2.0 * n + 3.0) * a + z;
            const double c = mu * big / s2;
            const double wa1 = (big + mu * t) / st;
            const double wa2 = wa1 - a / st;
            const double wb1 = (big - mu * t) / st;
            const double wb2 = wb1 + a / st;
            const double combo = detail::phi_diff_exp(c, wa1, wa2) -
                                 sgn_m * detail::phi_diff_exp(-c, wb1, wb2);
            gpart = pref2 * detail::ipow(gm2, m) * combo;
        }
        return coef * (fpart + gpart);
    };

    // (m+n+2)!/((m+2)! m! n!): first entry of diagonal d is (d+1)(d+2)/2;
    // stepping (m,n) -> (m+1,n-1) multiplies by n/((m+3)(m+1)).
    auto coef_first = [](int d, int m_lo) {
        double c = 0.5 * (d + 1.0) * (d + 2.0);
        for (int m = 0; m < m_lo; ++m) {
            c *= (d - m) / ((m + 3.0) * (m + 1.0));
        }
        return c;
    };
    auto coef_step = [](int m, int n, double c) {
        return c * n / ((m + 3.0) * (m + 1.0));
    };

    return detail::sum_antidiagonals(cfg, term, coef_first, coef_step);
}

SeriesResult density_ddu(const BmParams& p, double a, double b, double t,
                         const DensitySeriesConfig& cfg) {
    p.validate();
    if (!(a > 0.0) || !(b > 0.0) || !(t > 0.0)) {
        throw ValidationError("density_ddu requires a, b, t > 0");
    }
    if (a >= b) return density_dd_precedes(p, a, b, t, cfg);

    SeriesResult res = density_dd_precedes(p, a, a, t, cfg);
    bool all_converged = res.converged;
    double cond = res.condition_estimate;
    int m_max = res.m_max, n_max = res.n_max;
    const auto integrand = [&](double z) {
        const SeriesResult r = density_joint_sup_du(p, a, z, t, cfg);
        all_converged = all_converged && r.converged;
        cond = std::max(cond, r.condition_estimate);
        m_max = std::max(m_max, r.m_max);
        n_max = std::max(n_max, r.n_max);
        return r.value;
    };
    res.value += integrate_adaptive(integrand, 0.0, b - a, 1e-10, 200);
    res.converged = all_converged;
    res.condition_estimate = cond;
    res.m_max = m_max;
    res.n_max = n_max;
    if (res.value < 0.0 && res.value >= -10.0 * cfg.term_tol) {
        res.value = 0.0;
        res.clamped = true;
    }
    return res;
}

}  // namespace ddlab
