#include "ddlab/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ddlab/hitting.hpp"
#include "ddlab/quadrature.hpp"

namespace ddlab {

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::bm: return "bm";
        case ModelKind::gbm: return "gbm";
        case ModelKind::ou: return "ou";
        case ModelKind::cir: return "cir";
        case ModelKind::tabulated: return "tabulated";
    }
    return "?";
}

DiffusionModel DiffusionModel::brownian(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
        throw ValidationError("brownian model requires finite mu and sigma > 0");
    }
    DiffusionModel m;
    m.kind_ = ModelKind::bm;
    m.params_ = {mu, sigma};
    m.base_interval_ = {};
    m.interval_ = m.base_interval_;
    return m;
}

DiffusionModel DiffusionModel::geometric_brownian(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
        throw ValidationError("geometric model requires finite mu and sigma > 0");
    }
    DiffusionModel m;
    m.kind_ = ModelKind::gbm;
    m.params_ = {mu, sigma};
    m.base_interval_ = {0.0, std::numeric_limits<double>::infinity()};
    m.interval_ = m.base_interval_;
    return m;
}

DiffusionModel DiffusionModel::ornstein_uhlenbeck(double theta, double kappa, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(theta) || !std::isfinite(kappa)) {
        throw ValidationError("ou model requires finite theta, kappa and sigma > 0");
    }
    DiffusionModel m;
    m.kind_ = ModelKind::ou;
    m.params_ = {theta, kappa, sigma};
    m.base_interval_ = {};
    m.interval_ = m.base_interval_;
    return m;
}

DiffusionModel DiffusionModel::cox_ingersoll_ross(double theta, double kappa, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(theta) || !std::isfinite(kappa)) {
        throw ValidationError("cir model requires finite theta, kappa and sigma > 0");
    }
    DiffusionModel m;
    m.kind_ = ModelKind::cir;
    m.params_ = {theta, kappa, sigma};
    m.base_interval_ = {0.0, std::numeric_limits<double>::infinity()};
    m.interval_ = m.base_interval_;
    return m;
}

DiffusionModel DiffusionModel::tabulated(std::vector<double> u, std::vector<double> mu,
                                         std::vector<double> sigma) {
    if (u.size() < 2 || u.size() != mu.size() || u.size() != sigma.size()) {
        throw ValidationError("tabulated model requires at least two rows of equal length");
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isfinite(u[i]) || !std::isfinite(mu[i]) || !std::isfinite(sigma[i])) {
            throw ValidationError("tabulated model requires finite entries");
        }
        if (!(sigma[i] > 0.0)) throw ValidationError("tabulated model requires sigma > 0");
        if (i > 0 && !(u[i] > u[i - 1])) {
            throw ValidationError("tabulated model requires strictly increasing u");
        }
    }
    DiffusionModel m;
    m.kind_ = ModelKind::tabulated;
    m.tab_u_ = std::move(u);
    m.tab_mu_ = std::move(mu);
    m.tab_sigma_ = std::move(sigma);
    m.base_interval_ = {m.tab_u_.front(), m.tab_u_.back()};
    m.interval_ = m.base_interval_;
    return m;
}

DiffusionModel DiffusionModel::tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open tabulated model file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty tabulated model file: " + path);
    // tolerate trailing CR from CRLF files
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "u,mu,sigma") {
        throw ValidationError("tabulated model file must start with header `u,mu,sigma`");
    }
    std::vector<double> u, mu, sigma;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        double a, b, c;
        char c1, c2;
        if (!(ss >> a >> c1 >> b >> c2 >> c) || c1 != ',' || c2 != ',') {
            throw ValidationError("bad tabulated model row " + std::to_string(row));
        }
        u.push_back(a);
        mu.push_back(b);
        sigma.push_back(c);
    }
    return tabulated(std::move(u), std::move(mu), std::move(sigma));
}

Coeffs DiffusionModel::base_coeffs(double w) const {
    switch (kind_) {
        case ModelKind::bm:
            return {params_[0], params_[1]};
        case ModelKind::gbm:
            return {params_[0] * w, params_[1] * w};
        case ModelKind::ou:
            return {params_[1] * (params_[0] - w), params_[2]};
        case ModelKind::cir:
            return {params_[1] * (params_[0] - w), params_[2] * std::sqrt(w)};
        case ModelKind::tabulated: {
            if (w < tab_u_.front() || w > tab_u_.back()) {
                throw NonFiniteCoefficient("tabulated model evaluated outside its table at u=" +
                                           std::to_string(w));
            }
            auto it = std::upper_bound(tab_u_.begin(), tab_u_.end(), w);
            std::size_t i = (it == tab_u_.end() ? tab_u_.size() - 1
                                                : static_cast<std::size_t>(it - tab_u_.begin()));
            if (i == 0) i = 1;
            const double t = (w - tab_u_[i - 1]) / (tab_u_[i] - tab_u_[i - 1]);
            return {tab_mu_[i - 1] + t * (tab_mu_[i] - tab_mu_[i - 1]),
                    tab_sigma_[i - 1] + t * (tab_sigma_[i] - tab_sigma_[i - 1])};
        }
    }
    throw ValidationError("unknown model kind");
}

Coeffs DiffusionModel::coeffs(double u) const {
    const Coeffs c = base_coeffs(map_a_ * u + map_b_);
    return {map_a_ * c.mu, c.sigma};
}

DiffusionModel DiffusionModel::reflected(double about) const {
    DiffusionModel m = *this;
    // compose u -> 2*about - u with the existing map
    m.map_a_ = -map_a_;
    m.map_b_ = map_a_ * 2.0 * about + map_b_;
    const double lo = 2.0 * about - interval_.hi;
    const double hi = 2.0 * about - interval_.lo;
    m.interval_ = {lo, hi};
    return m;
}

DiffusionModel reflect(const DiffusionModel& model, double x) {
    if (!model.interval().contains(x)) {
        throw ValidationError("reflection point must lie inside the state interval");
    }
    return model.reflected(x);
}

void HittingQuery::validate(const DiffusionModel& model) const {
    if (!(y < z)) throw ValidationError("hitting query requires y < z");
    if (!(y <= x && x <= z)) throw ValidationError("hitting query requires y <= x <= z");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("hitting query requires lambda >= 0");
    }
    const StateInterval& iv = model.interval();
    if (!iv.contains_closed(y) || !iv.contains_closed(z)) {
        throw ValidationError("hitting barriers must lie inside the closed state interval");
    }
}

double scale_function(const DiffusionModel& model, double x0, double x) {
    const StateInterval& iv = model.interval();
    if (!iv.contains_closed(x0) || !iv.contains_closed(x)) {
        throw ValidationError("scale function arguments must lie inside the interval");
    }
    const auto dlog = [&model](double w) {
        const Coeffs c = model.coeffs(w);
        return 2.0 * c.mu / (c.sigma * c.sigma);
    };
    const auto integrand = [&](double v) {
        return std::exp(-integrate_adaptive(dlog, x0, v, 1e-12, 400));
    };
    return integrate_adaptive(integrand, x0, x, 1e-11, 400);
}

double hitting_laplace(const DiffusionModel& model, const HittingQuery& q) {
    q.validate(model);
    if (q.x == q.y) return 1.0;
    if (q.x == q.z) return 0.0;
    if (q.lambda == 0.0) {
        // harmonic case: classical two-barrier ruin probability
        const double sz = scale_function(model, q.y, q.z);
        const double sx = scale_function(model, q.y, q.x);
        return (sz - sx) / sz;
    }
    detail::HittingEvaluator<double> ev(model, q.lambda);
    return ev.eval_one(q.y, q.x, q.z).down;
}

double hitting_laplace_bm(double mu, double sigma, const HittingQuery& q) {
    if (!(sigma > 0.0)) throw ValidationError("hitting_laplace_bm requires sigma > 0");
    const DiffusionModel m = DiffusionModel::brownian(mu, sigma);
    q.validate(m);
    return detail::hitting_laplace_bm_t<double>(mu, sigma, q.y, q.z, q.x, q.lambda);
}

}  // namespace ddlab
