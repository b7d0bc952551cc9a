#include "ddlab/dd_laplace.hpp"

namespace ddlab {

double laplace_equal(const DiffusionModel& model, double x, double a, double lambda,
                     const NumericsConfig& cfg) {
    cfg.validate();
    DrawQuery{x, a, a, lambda}.validate(model);
    if (!(lambda > 0.0)) throw ValidationError("laplace_equal requires lambda > 0");
    return detail::laplace_equal_t(model, x, a, lambda, cfg);
}

double h_factor(const DiffusionModel& model, double u, double b, double c, double lambda,
                const NumericsConfig& cfg) {
    cfg.validate();
    if (!(c <= u)) throw ValidationError("h_factor requires c <= u");
    if (!(b > 0.0) || !(lambda > 0.0)) throw ValidationError("h_factor requires b, lambda > 0");
    const StateInterval& iv = model.interval();
    if (!iv.contains_closed(c) || !iv.contains_closed(u + b)) {
        throw ValidationError("h_factor requires c and u + b inside the interval");
    }
    if (c == u) return 1.0;
    return detail::h_factor_t(model, u, b, c, lambda, cfg);
}

double laplace_dd_larger(const DiffusionModel& model, double x, double a, double b,
                         double lambda, const NumericsConfig& cfg) {
    cfg.validate();
    DrawQuery{x, a, b, lambda}.validate(model);
    if (!(a > b)) throw ValidationError("laplace_dd_larger requires a > b");
    if (!(lambda > 0.0)) throw ValidationError("laplace_dd_larger requires lambda > 0");
    return detail::laplace_dd_larger_t(model, x, a, b, lambda, cfg);
}

double laplace_dd_uncond(const DiffusionModel& model, double x, double a, double lambda,
                         const NumericsConfig& cfg) {
    cfg.validate();
    if (!(a > 0.0)) throw ValidationError("laplace_dd_uncond requires a > 0");
    if (!(lambda > 0.0)) throw ValidationError("laplace_dd_uncond requires lambda > 0");
    if (!model.interval().contains_closed(x - a) || !model.interval().contains_closed(x)) {
        throw ValidationError("laplace_dd_uncond requires x and x - a inside the interval");
    }
    return detail::laplace_dd_uncond_t(model, x, a, lambda, cfg);
}

double laplace_du_larger(const DiffusionModel& model, double x, double a, double b,
                         double lambda, const NumericsConfig& cfg) {
    cfg.validate();
    DrawQuery{x, a, b, lambda}.validate(model);
    if (!(b > a)) throw ValidationError("laplace_du_larger requires b > a");
    if (!(lambda > 0.0)) throw ValidationError("laplace_du_larger requires lambda > 0");
    return detail::laplace_du_larger_t(model, x, a, b, lambda, cfg);
}

double laplace_ddu(const DiffusionModel& model, double x, double a, double b, double lambda,
                   const NumericsConfig& cfg) {
    cfg.validate();
    DrawQuery{x, a, b, lambda}.validate(model);
    if (!(lambda > 0.0)) throw ValidationError("laplace_ddu requires lambda > 0");
    return detail::laplace_ddu_t(model, x, a, b, lambda, cfg);
}

double precede_probability(const DiffusionModel& model, double x, double a, double b,
                           const NumericsConfig& cfg) {
    cfg.validate();
    DrawQuery{x, a, b, 0.0}.validate(model);
    // evaluate at a dyadic ladder of tiny lambdas and extrapolate to zero
    const double l4 = detail::laplace_ddu_t(model, x, a, b, 4e-10, cfg);
    const double l2 = detail::laplace_ddu_t(model, x, a, b, 2e-10, cfg);
    const double l1 = detail::laplace_ddu_t(model, x, a, b, 1e-10, cfg);
    const double e1 = 2.0 * l1 - l2;
    const double e2 = 2.0 * l2 - l4;
    return (4.0 * e1 - e2) / 3.0;
}

}  // namespace ddlab
