#include "ddlab/mc.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "ddlab/dd_laplace.hpp"
#include "ddlab/rng.hpp"

namespace ddlab {

namespace {

struct PathState {
    double x, max, min;
    double dd = 0.0, du = 0.0;
    double sup_du = 0.0;
};

void simulate_one(const DiffusionModel& model, double x0, double a, double b,
                  const SimConfig& cfg, std::size_t path_id, std::size_t n_steps,
                  double last_dt, StoppingRecord& rec) {
    detail::CounterRng rng(cfg.seed, path_id);

    PathState s{x0, x0, x0};
    const bool exact = cfg.scheme == SimScheme::exact_bm;
    double mu_dt = 0.0, sig_sqdt = 0.0;
    if (exact) {
        const Coeffs c = model.coeffs(x0);
        mu_dt = c.mu * cfg.dt;
        sig_sqdt = c.sigma * std::sqrt(cfg.dt);
    }

    const StateInterval& iv = model.interval();
    bool dd_hit = false, du_hit = false, range_hit = false;
    double t0 = 0.0;

    for (std::size_t k = 0; k < n_steps; ++k) {
        const double dt = (k + 1 == n_steps) ? last_dt : cfg.dt;
        const double z = rng.next_normal();
        double dx;
        if (exact) {
            dx = (dt == cfg.dt) ? mu_dt + sig_sqdt * z
                                : model.coeffs(x0).mu * dt +
                                      model.coeffs(x0).sigma * std::sqrt(dt) * z;
        } else {
            if (!iv.contains(s.x)) {
                throw StateLeftInterval("path " + std::to_string(path_id) +
                                        " left the state interval");
            }
            const Coeffs c = model.coeffs(s.x);
            dx = c.mu * dt + c.sigma * std::sqrt(dt) * z;
        }

        const double xn = s.x + dx;
        const double maxn = std::max(s.max, xn);
        const double minn = std::min(s.min, xn);
        const double ddn = maxn - xn;
        const double dun = xn - minn;

        if (!dd_hit && ddn >= a) {
            const double frac = std::clamp((a - s.dd) / (ddn - s.dd), 0.0, 1.0);
            rec.t_dd = t0 + frac * dt;
            rec.censored_dd = false;
            rec.step_dd = static_cast<std::uint32_t>(k);
            rec.x_at_dd = s.x + frac * dx;
            rec.sup_du_before_dd = std::max(s.sup_du, s.du + frac * (dun - s.du));
            dd_hit = true;
        }
        if (!du_hit && dun >= b) {
            const double frac = std::clamp((b - s.du) / (dun - s.du), 0.0, 1.0);
            rec.t_du = t0 + frac * dt;
            rec.censored_du = false;
            rec.step_du = static_cast<std::uint32_t>(k);
            du_hit = true;
        }
        if (!range_hit && (maxn - minn) >= a) {
            const double r_prev = s.max - s.min;
            const double frac = std::clamp((a - r_prev) / ((maxn - minn) - r_prev), 0.0, 1.0);
            rec.t_range = t0 + frac * dt;
            rec.step_range = static_cast<std::uint32_t>(k);
            range_hit = true;
        }

        s.x = xn;
        s.max = maxn;
        s.min = minn;
        s.dd = ddn;
        s.du = dun;
        s.sup_du = std::max(s.sup_du, dun);
        t0 += dt;

        if (dd_hit || du_hit) break;
    }

    rec.x_end = s.x;
    if (!dd_hit) rec.t_dd = t0;
    if (!du_hit) rec.t_du = t0;
    if (!range_hit) rec.t_range = t0;
}

// two-pass mean / standard error, compensated accumulation
Estimate mean_and_se(const std::vector<double>& v) {
    Estimate e;
    const std::size_t n = v.size();
    if (n == 0) return e;
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        const double t = sum + x;
        comp += (std::fabs(sum) >= std::fabs(x)) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    e.value = (sum + comp) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) {
        const double d = x - e.value;
        ss += d * d;
    }
    if (n > 1) e.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    return e;
}

}  // namespace

StoppingEnsemble simulate(const DiffusionModel& model, double x, double a, double b,
                          const SimConfig& cfg) {
    DrawQuery{x, a, b, 0.0}.validate(model);
    if (cfg.paths < 1) throw ValidationError("simulate requires paths >= 1");
    if (!(cfg.dt > 0.0)) throw ValidationError("simulate requires dt > 0");
    if (cfg.workers < 1) throw ValidationError("simulate requires workers >= 1");

    const double vol0 = model.vol(x);
    if (vol0 * std::sqrt(cfg.dt) > std::min(a, b) / 100.0) {
        throw ValidationError("time step too coarse: vol(x)*sqrt(dt) must be <= min(a,b)/100");
    }
    if (cfg.scheme == SimScheme::exact_bm && !model.constant_coefficients()) {
        throw ValidationError("the exact scheme applies to constant-coefficient models only");
    }

    StoppingEnsemble e;
    e.config = cfg;
    if (!(e.config.horizon > 0.0)) {
        e.config.horizon = 50.0 * std::pow(std::max(a, b) / vol0, 2);
    }
    e.x0 = x;
    e.a = a;
    e.b = b;
    e.records.resize(cfg.paths);

    const double horizon = e.config.horizon;
    const std::size_t full = static_cast<std::size_t>(horizon / cfg.dt);
    const double rem = horizon - static_cast<double>(full) * cfg.dt;
    const std::size_t n_steps = full + (rem > 1e-12 * cfg.dt ? 1 : 0);
    const double last_dt = (rem > 1e-12 * cfg.dt) ? rem : cfg.dt;

    const auto run_chunk = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            simulate_one(model, x, a, b, e.config, i, n_steps, last_dt, e.records[i]);
        }
    };

    const int workers = std::min<int>(cfg.workers, static_cast<int>(cfg.paths));
    if (workers <= 1) {
        run_chunk(0, cfg.paths);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::size_t chunk = (cfg.paths + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(cfg.paths, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, w, lo, hi] {
                try {
                    run_chunk(lo, hi);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }
    }
    return e;
}

Estimate estimate_laplace(const StoppingEnsemble& e, double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("estimate_laplace requires lambda > 0");
    std::vector<double> v(e.records.size());
    for (std::size_t i = 0; i < e.records.size(); ++i) {
        const StoppingRecord& r = e.records[i];
        v[i] = r.dd_first() ? std::exp(-lambda * r.t_dd) : 0.0;
    }
    Estimate est = mean_and_se(v);
    est.horizon_warning = std::exp(-lambda * e.config.horizon) >= 1e-6;
    return est;
}

Estimate estimate_finite_horizon(const StoppingEnsemble& e, double T) {
    if (!(T >= 0.0) || T > e.config.horizon) {
        throw ValidationError("estimate_finite_horizon requires 0 <= T <= horizon");
    }
    std::vector<double> v(e.records.size());
    for (std::size_t i = 0; i < e.records.size(); ++i) {
        const StoppingRecord& r = e.records[i];
        v[i] = (r.dd_first() && r.t_dd <= T) ? 1.0 : 0.0;
    }
    return mean_and_se(v);
}

RangeIdentityReport verify_range_identity(const StoppingEnsemble& e) {
    if (e.a != e.b) {
        throw ValidationError("the range identity applies to a = b ensembles");
    }
    RangeIdentityReport rep;
    rep.paths_checked = e.records.size();
    for (const StoppingRecord& r : e.records) {
        const std::uint32_t first = std::min(r.step_dd, r.step_du);
        if (r.step_range != first) {
            ++rep.violations;
            continue;
        }
        if (first != StoppingRecord::kNoStep) {
            const double t_first = std::min(r.censored_dd ? std::numeric_limits<double>::max()
                                                          : r.t_dd,
                                            r.censored_du ? std::numeric_limits<double>::max()
                                                          : r.t_du);
            if (std::fabs(r.t_range - t_first) > e.config.dt) ++rep.violations;
        }
    }
    return rep;
}

void write_ensemble_csv(const StoppingEnsemble& e, std::ostream& out) {
    out << "path_id,t_dd,t_du,censored_dd,censored_du,x_at_dd,sup_du_before_dd\n";
    char buf[256];
    for (std::size_t i = 0; i < e.records.size(); ++i) {
        const StoppingRecord& r = e.records[i];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%d,%d,%.17g,%.17g\n", i, r.t_dd,
                      r.t_du, r.censored_dd ? 1 : 0, r.censored_du ? 1 : 0, r.x_at_dd,
                      r.sup_du_before_dd);
        out << buf;
    }
}

}  // namespace ddlab
