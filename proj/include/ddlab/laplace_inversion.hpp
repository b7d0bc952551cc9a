#pragma once

#include <complex>
#include <functional>

#include "ddlab/dd_laplace.hpp"
#include "ddlab/diffusion.hpp"

namespace ddlab {

// A Laplace transform lambda -> L(lambda), defined for complex lambda with
// the analytic continuation of the real formulas.
struct TransformEvaluator {
    std::function<std::complex<double>(std::complex<double>)> eval;
};

// Fixed-Talbot contour inversion of F at time t. nodes in [16, 64].
double invert(const TransformEvaluator& F, double t, int nodes = 32);

// Density estimate P_x(T_D(a) in dt, T_U(b) > t)/dt for a general diffusion,
// inverting the drawdown-precedes-drawup transform evaluated at complex
// lambda (the shooting solve runs with complex-valued state).
double invert_general(const DiffusionModel& model, double x, double a, double b, double t,
                      const NumericsConfig& cfg = {}, int nodes = 32);

}  // namespace ddlab
