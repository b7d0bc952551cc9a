#include "ddlab/apps.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ddlab/quadrature.hpp"

namespace ddlab {

StartDensity load_start_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open start-density file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty start-density file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "y,f") throw ValidationError("start-density file must start with header `y,f`");
    StartDensity d;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        double y, f;
        char c;
        if (!(ss >> y >> c >> f) || c != ',') {
            throw ValidationError("bad start-density row " + std::to_string(row));
        }
        d.y.push_back(y);
        d.f.push_back(f);
    }
    for (std::size_t i = 0; i < d.y.size(); ++i) {
        if (!std::isfinite(d.y[i]) || !std::isfinite(d.f[i])) {
            throw ValidationError("start density requires finite entries");
        }
        if (i > 0 && !(d.y[i] > d.y[i - 1])) {
            throw ValidationError("start density requires strictly increasing y");
        }
    }
    return d;
}

std::pair<double, double> relative_to_log(const RelativeEventSpec& spec) {
    spec.validate();
    return {-std::log1p(-spec.alpha), std::log1p(spec.beta)};
}

double price_perpetual(const RelativeEventSpec& spec, const PricingSpec& p) {
    p.validate();
    if (!p.perpetual) throw ValidationError("price_perpetual requires the perpetual flag");
    if (!(p.r > 0.0)) throw ValidationError("a perpetual digital price requires r > 0");
    const auto [a, b] = relative_to_log(spec);
    const double nu = p.r - 0.5 * p.sigma * p.sigma;  // risk-neutral log drift
    return bm_laplace_ddu({nu, p.sigma}, a, b, p.r);
}

double price_finite(const RelativeEventSpec& spec, const PricingSpec& p,
                    const DensitySeriesConfig& series_cfg) {
    p.validate();
    if (!p.maturity) throw ValidationError("price_finite requires a maturity");
    const auto [a, b] = relative_to_log(spec);
    const double nu = p.r - 0.5 * p.sigma * p.sigma;
    const BmParams log_price{nu, p.sigma};
    const auto integrand = [&](double t) {
        return std::exp(-p.r * t) * density_ddu(log_price, a, b, t, series_cfg).value;
    };
    return integrate_adaptive(integrand, 0.0, *p.maturity, 1e-8, 400);
}

double misid_exponential(const SignalSpec& spec, double x, const NumericsConfig& cfg) {
    if (spec.life.kind != LifeSpec::Kind::exponential || !(spec.life.value > 0.0)) {
        throw ValidationError("misid_exponential requires an exponential life with rate > 0");
    }
    if (!(spec.a > 0.0) || !(spec.b > 0.0)) {
        throw ValidationError("misid thresholds must be positive");
    }
    const double rate = spec.life.value;
    if (spec.model.constant_coefficients()) {
        const Coeffs c = spec.model.coeffs(x);
        return bm_laplace_ddu({c.mu, c.sigma}, spec.a, spec.b, rate);
    }
    return laplace_ddu(spec.model, x, spec.a, spec.b, rate, cfg);
}

double misid_aggregate(const SignalSpec& spec, double x, const NumericsConfig& cfg) {
    if (!spec.start_density) {
        throw ValidationError("misid_aggregate requires a tabulated start density");
    }
    (void)x;  // the start density already conditions on the pre-change start
    const StartDensity& d = *spec.start_density;
    if (d.y.size() < 2) throw ValidationError("start density needs at least two rows");

    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < d.y.size(); ++i) {
        if (d.f[i] < 0.0 || d.f[i + 1] < 0.0) {
            throw DensityNotNormalized("start density has negative values");
        }
        mass += 0.5 * (d.f[i] + d.f[i + 1]) * (d.y[i + 1] - d.y[i]);
    }
    if (std::fabs(mass - 1.0) > 1e-6) {
        throw DensityNotNormalized("start density integrates to " + std::to_string(mass));
    }

    // trapezoid of L_y(rate; a, b) f(y) on the provided grid
    SignalSpec pointwise = spec;
    pointwise.start_density.reset();
    std::vector<double> g(d.y.size());
    for (std::size_t i = 0; i < d.y.size(); ++i) {
        g[i] = (d.f[i] > 0.0) ? misid_exponential(pointwise, d.y[i], cfg) * d.f[i] : 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < d.y.size(); ++i) {
        acc += 0.5 * (g[i] + g[i + 1]) * (d.y[i + 1] - d.y[i]);
    }
    return acc;
}

double misid_deterministic(const BmParams& p, double a, double T,
                           const DensitySeriesConfig& series_cfg) {
    p.validate();
    if (!(a > 0.0) || !(T > 0.0)) throw ValidationError("misid_deterministic requires a, T > 0");
    const auto integrand = [&](double t) {
        return density_dd_precedes(p, a, a, t, series_cfg).value;
    };
    return integrate_adaptive(integrand, 0.0, T, 1e-8, 400);
}

}  // namespace ddlab
