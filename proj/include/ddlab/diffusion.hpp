#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ddlab/errors.hpp"

namespace ddlab {

// Open state interval (lo, hi); endpoints may be infinite.
struct StateInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double u) const { return u > lo && u < hi; }
    bool contains_closed(double u) const { return u >= lo && u <= hi; }
};

enum class ModelKind { bm, gbm, ou, cir, tabulated };

const char* to_string(ModelKind k);

struct Coeffs {
    double mu;
    double sigma;
};

// A one-dimensional diffusion dX = mu(X) dt + sigma(X) dB on an interval,
// drawn from a parametric catalog or a piecewise-linear table. A model can
// carry an affine state map u -> map_a*u + map_b (map_a = +-1) so that
// mirror images (the process 2c - X) stay inside the catalog.
class DiffusionModel {
public:
    static DiffusionModel brownian(double mu, double sigma);
    static DiffusionModel geometric_brownian(double mu, double sigma);
    static DiffusionModel ornstein_uhlenbeck(double theta, double kappa, double sigma);
    static DiffusionModel cox_ingersoll_ross(double theta, double kappa, double sigma);
    static DiffusionModel tabulated(std::vector<double> u, std::vector<double> mu,
                                    std::vector<double> sigma);
    // CSV with header `u,mu,sigma`, strictly increasing u, finite reals.
    static DiffusionModel tabulated_from_csv(const std::string& path);

    ModelKind kind() const { return kind_; }
    const StateInterval& interval() const { return interval_; }

    // True when the coefficients are constants (plain or mirrored Brownian
    // motion), which is what the exact simulation scheme requires.
    bool constant_coefficients() const { return kind_ == ModelKind::bm; }

    Coeffs coeffs(double u) const;
    double drift(double u) const { return coeffs(u).mu; }
    double vol(double u) const { return coeffs(u).sigma; }

    // Model of the mirrored process Y = 2*about - X.
    DiffusionModel reflected(double about) const;

    const std::vector<double>& params() const { return params_; }

private:
    DiffusionModel() = default;

    Coeffs base_coeffs(double w) const;

    ModelKind kind_ = ModelKind::bm;
    std::vector<double> params_;           // catalog parameters
    std::vector<double> tab_u_, tab_mu_, tab_sigma_;
    StateInterval base_interval_;          // in base coordinates
    StateInterval interval_;               // in mapped coordinates
    double map_a_ = 1.0;                   // +1 or -1
    double map_b_ = 0.0;
};

// Two-barrier hitting query for the transform E_x[e^{-lambda tau_y}; tau_y < tau_z].
struct HittingQuery {
    double y;       // lower barrier
    double z;       // upper barrier
    double x;       // start point
    double lambda;  // transform parameter >= 0

    void validate(const DiffusionModel& model) const;
};

// E_x[e^{-lambda tau_y}; tau_y < tau_z], computed by a linear-shooting solve
// of the generator ODE on [y,z]; the lambda = 0 case uses the scale function.
double hitting_laplace(const DiffusionModel& model, const HittingQuery& q);

// Closed form for drifted Brownian motion.
double hitting_laplace_bm(double mu, double sigma, const HittingQuery& q);

// Model of Y = 2x - X.
DiffusionModel reflect(const DiffusionModel& model, double x);

// Scale function s(x) = int_{x0}^{x} exp(-int_{x0}^{v} 2 mu/sigma^2 dw) dv.
double scale_function(const DiffusionModel& model, double x0, double x);

}  // namespace ddlab
