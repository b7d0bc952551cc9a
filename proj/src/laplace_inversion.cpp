#include "ddlab/laplace_inversion.hpp"

#include <cmath>

#include "ddlab/errors.hpp"

namespace ddlab {

// Fixed-Talbot rule: one real node at r = 2M/(5t) plus M-1 nodes along the
// deformed contour s(theta) = r theta (cot theta + i).
double invert(const TransformEvaluator& F, double t, int nodes) {
    if (!(t > 0.0)) throw ValidationError("invert requires t > 0");
    if (nodes < 16 || nodes > 64) throw ValidationError("invert requires nodes in [16, 64]");
    if (!F.eval) throw ValidationError("invert requires a transform evaluator");

    const int M = nodes;
    const double r = 2.0 * M / (5.0 * t);

    const std::complex<double> f_r = F.eval(std::complex<double>(r, 0.0));
    if (!detail::is_finite(f_r)) {
        throw EvaluatorFailed("transform evaluator returned a non-finite value at the real node");
    }
    double sum = 0.5 * f_r.real() * std::exp(r * t);

    for (int k = 1; k < M; ++k) {
        const double theta = k * M_PI / M;
        const double cot = std::cos(theta) / std::sin(theta);
        const std::complex<double> s(r * theta * cot, r * theta);
        const double sigma = theta + (theta * cot - 1.0) * cot;
        const std::complex<double> fv = F.eval(s);
        if (!detail::is_finite(fv)) {
            throw EvaluatorFailed("transform evaluator returned a non-finite value on the contour");
        }
        const std::complex<double> term =
            std::exp(t * s) * fv * std::complex<double>(1.0, sigma);
        sum += term.real();
    }
    return sum * r / M;
}

double invert_general(const DiffusionModel& model, double x, double a, double b, double t,
                      const NumericsConfig& cfg, int nodes) {
    cfg.validate();
    DrawQuery{x, a, b, 0.0}.validate(model);
    TransformEvaluator F{[&](std::complex<double> lambda) {
        return detail::laplace_ddu_t(model, x, a, b, lambda, cfg);
    }};
    return invert(F, t, nodes);
}

}  // namespace ddlab
