#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ddlab/bm_analytic.hpp"
#include "ddlab/dd_laplace.hpp"
#include "ddlab/diffusion.hpp"

namespace ddlab {

// Relative drawdown/drawup event: a drop of 100*alpha percent from the
// running high versus a rise of 100*beta percent from the running low.
struct RelativeEventSpec {
    double alpha;
    double beta;

    void validate() const {
        if (!(alpha > 0.0) || !(alpha < 1.0) || !(beta > 0.0)) {
            throw ValidationError("relative event requires 0 < alpha < 1 and beta > 0");
        }
    }
};

struct PricingSpec {
    double r = 0.0;          // risk-free rate >= 0
    double sigma = 0.0;      // stock volatility > 0
    std::optional<double> maturity;  // exactly one of maturity/perpetual
    bool perpetual = false;

    void validate() const {
        if (!(sigma > 0.0)) throw ValidationError("pricing requires sigma > 0");
        if (!(r >= 0.0)) throw ValidationError("pricing requires r >= 0");
        if (perpetual == maturity.has_value()) {
            throw ValidationError("exactly one of maturity and perpetual must be set");
        }
        if (maturity && !(*maturity > 0.0)) throw ValidationError("maturity must be > 0");
    }
};

// Tabulated start density f(y) on a strictly increasing grid.
struct StartDensity {
    std::vector<double> y;
    std::vector<double> f;
};

// CSV with header `y,f`, strictly increasing y.
StartDensity load_start_density_csv(const std::string& path);

struct LifeSpec {
    enum class Kind { exponential, deterministic };
    Kind kind = Kind::exponential;
    double value = 0.0;  // rate for exponential, T for deterministic

    static LifeSpec exponential(double rate) { return {Kind::exponential, rate}; }
    static LifeSpec deterministic(double T) { return {Kind::deterministic, T}; }
};

// Post-change dynamics and detector thresholds for the transient-signal
// identification problem.
struct SignalSpec {
    DiffusionModel model;
    double a = 0.0;
    double b = 0.0;
    LifeSpec life;
    std::optional<StartDensity> start_density;
};

// Map relative sizes to log-price drawdown/drawup sizes:
// a = -log(1-alpha), b = log(1+beta).
std::pair<double, double> relative_to_log(const RelativeEventSpec& spec);

// Risk-neutral price of the digital option paying one when the relative
// drawdown precedes the relative drawup.
double price_perpetual(const RelativeEventSpec& spec, const PricingSpec& p);
double price_finite(const RelativeEventSpec& spec, const PricingSpec& p,
                    const DensitySeriesConfig& series_cfg = {});

// Probability that the drawdown alarm fires before both the drawup alarm and
// the exponential end of the signal's life.
double misid_exponential(const SignalSpec& spec, double x, const NumericsConfig& cfg = {});

// Same, averaged over a tabulated density of the post-change start point.
double misid_aggregate(const SignalSpec& spec, double x, const NumericsConfig& cfg = {});

// Deterministic-life misidentification probability for Brownian motion with
// symmetric thresholds.
double misid_deterministic(const BmParams& p, double a, double T,
                           const DensitySeriesConfig& series_cfg = {});

}  // namespace ddlab
