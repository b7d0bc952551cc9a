// ddlab: Laplace transforms, densities and probabilities of drawdown/drawup
// stopping times for one-dimensional diffusions, plus the digital-option and
// signal-misidentification applications. Scalar results print as single-line
// JSON; grids and ensembles go to CSV.

#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddlab/apps.hpp"
#include "ddlab/bm_analytic.hpp"
#include "ddlab/dd_laplace.hpp"
#include "ddlab/diffusion.hpp"
#include "ddlab/laplace_inversion.hpp"
#include "ddlab/mc.hpp"
#include "ddlab/selftest.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

struct ModelFlags {
    std::string kind = "bm";
    double mu = 0.0;
    double sigma = 1.0;
    double theta = 0.0;
    double kappa = 1.0;
    std::string table;
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
    cmd->add_option("--model", mf.kind, "model kind: bm|gbm|ou|cir|tabulated")
        ->default_val("bm");
    cmd->add_option("--mu", mf.mu, "drift (bm, gbm)");
    cmd->add_option("--sigma", mf.sigma, "volatility (bm, gbm, ou, cir)");
    cmd->add_option("--theta", mf.theta, "long-run level (ou, cir)");
    cmd->add_option("--kappa", mf.kappa, "mean-reversion speed (ou, cir)");
    cmd->add_option("--table", mf.table, "coefficient CSV for the tabulated model");
}

ddlab::DiffusionModel build_model(const ModelFlags& mf) {
    using ddlab::DiffusionModel;
    if (mf.kind == "bm") return DiffusionModel::brownian(mf.mu, mf.sigma);
    if (mf.kind == "gbm") return DiffusionModel::geometric_brownian(mf.mu, mf.sigma);
    if (mf.kind == "ou") return DiffusionModel::ornstein_uhlenbeck(mf.theta, mf.kappa, mf.sigma);
    if (mf.kind == "cir") return DiffusionModel::cox_ingersoll_ross(mf.theta, mf.kappa, mf.sigma);
    if (mf.kind == "tabulated") {
        if (mf.table.empty()) throw ddlab::ValidationError("tabulated model requires --table");
        return DiffusionModel::tabulated_from_csv(mf.table);
    }
    throw ddlab::ValidationError("unknown model kind: " + mf.kind);
}

struct TGrid {
    double start = 0.1, stop = 5.0, step = 0.1;
};

TGrid parse_tgrid(const std::string& s) {
    TGrid g;
    char c1, c2;
    std::istringstream ss(s);
    if (!(ss >> g.start >> c1 >> g.stop >> c2 >> g.step) || c1 != ':' || c2 != ':' ||
        !(g.step > 0.0) || !(g.start > 0.0) || g.stop < g.start) {
        throw ddlab::ValidationError("bad t grid, expected start:stop:step with 0 < start");
    }
    return g;
}

void emit(const json& j) { std::cout << j.dump() << "\n"; }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ddlab::ValidationError("cannot open output file: " + path);
    return out;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"drawdown/drawup stopping-time analytics"};
    app.require_subcommand(1);

    ddlab::NumericsConfig numerics;
    ddlab::DensitySeriesConfig series;
    app.add_option("--quad-tol", numerics.quad_tol, "absolute quadrature tolerance")
        ->default_val(1e-9);
    app.add_option("--term-tol", series.term_tol, "series tail tolerance")->default_val(1e-12);
    app.add_option("--max-order", series.max_order, "series order cap")->default_val(60);

    // laplace -----------------------------------------------------------
    auto* laplace = app.add_subcommand("laplace", "transform of T_D(a) on {T_D(a) < T_U(b)}");
    ModelFlags lp_m;
    add_model_flags(laplace, lp_m);
    double lp_x = 0.0, lp_a = 1.0, lp_b = 1.0, lp_lambda = 1.0;
    laplace->add_option("--x", lp_x, "start point");
    laplace->add_option("--a", lp_a, "drawdown size")->required();
    laplace->add_option("--b", lp_b, "drawup size")->required();
    laplace->add_option("--lambda", lp_lambda, "transform parameter")->required();

    // prob ---------------------------------------------------------------
    auto* prob = app.add_subcommand("prob", "P(T_D(a) < T_U(b))");
    ModelFlags pr_m;
    add_model_flags(prob, pr_m);
    double pr_x = 0.0, pr_a = 1.0, pr_b = 1.0;
    prob->add_option("--x", pr_x, "start point");
    prob->add_option("--a", pr_a, "drawdown size")->required();
    prob->add_option("--b", pr_b, "drawup size")->required();

    // density --------------------------------------------------------------
    auto* density = app.add_subcommand("density", "density of T_D(a) on {T_D(a) < T_U(b)}");
    ModelFlags de_m;
    add_model_flags(density, de_m);
    double de_x = 0.0, de_a = 1.0, de_b = 1.0;
    std::string de_grid = "0.1:5:0.1", de_out;
    density->add_option("--x", de_x, "start point");
    density->add_option("--a", de_a, "drawdown size")->required();
    density->add_option("--b", de_b, "drawup size")->required();
    density->add_option("--t", de_grid, "time grid start:stop:step");
    density->add_option("--out", de_out, "output CSV path (default stdout)");

    // prob-horizon ---------------------------------------------------------
    auto* ph = app.add_subcommand("prob-horizon", "P(T_D(a) <= T, T_U(b) > T_D(a))");
    ModelFlags ph_m;
    add_model_flags(ph, ph_m);
    double ph_x = 0.0, ph_a = 0.0, ph_b = 0.0, ph_T = 1.0;
    double ph_alpha = 0.0, ph_beta = 0.0;
    ph->add_option("--x", ph_x, "start point");
    ph->add_option("--a", ph_a, "drawdown size (absolute scale)");
    ph->add_option("--b", ph_b, "drawup size (absolute scale)");
    ph->add_option("--alpha", ph_alpha, "relative drop fraction (gbm)");
    ph->add_option("--beta", ph_beta, "relative rise fraction (gbm)");
    ph->add_option("--T", ph_T, "horizon")->required();

    // price ------------------------------------------------------------------
    auto* price = app.add_subcommand("price", "digital option on relative drawdown vs drawup");
    double pc_alpha = 0.0, pc_beta = 0.0, pc_r = 0.0, pc_sigma = 0.0;
    double pc_T = 0.0;
    bool pc_perp = false;
    price->add_option("--alpha", pc_alpha, "relative drop fraction")->required();
    price->add_option("--beta", pc_beta, "relative rise fraction")->required();
    price->add_option("--r", pc_r, "risk-free rate")->required();
    price->add_option("--sigma", pc_sigma, "stock volatility")->required();
    auto* pc_T_opt = price->add_option("--T", pc_T, "maturity");
    price->add_flag("--perpetual", pc_perp, "perpetual option");

    // misid ---------------------------------------------------------------
    auto* misid = app.add_subcommand("misid", "transient-signal misidentification probability");
    ModelFlags mi_m;
    add_model_flags(misid, mi_m);
    double mi_x = 0.0, mi_a = 1.0, mi_b = 1.0;
    double mi_rate = 0.0, mi_life = 0.0;
    std::string mi_density;
    misid->add_option("--x", mi_x, "post-change start point");
    misid->add_option("--a", mi_a, "drawdown threshold")->required();
    misid->add_option("--b", mi_b, "drawup threshold")->required();
    auto* mi_rate_opt = misid->add_option("--rate", mi_rate, "exponential life rate");
    auto* mi_life_opt = misid->add_option("--life", mi_life, "deterministic life T");
    misid->add_option("--start-density", mi_density, "tabulated start density CSV (y,f)");

    // simulate ---------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "Monte Carlo drawdown/drawup ensemble");
    ModelFlags sm_m;
    add_model_flags(sim, sm_m);
    double sm_x = 0.0, sm_a = 1.0, sm_b = 1.0;
    ddlab::SimConfig sim_cfg;
    std::string sm_out, sm_scheme = "exact-bm";
    sim->add_option("--x", sm_x, "start point");
    sim->add_option("--a", sm_a, "drawdown size")->required();
    sim->add_option("--b", sm_b, "drawup size")->required();
    sim->add_option("--paths", sim_cfg.paths, "number of paths")->default_val(100000);
    sim->add_option("--dt", sim_cfg.dt, "time step")->required();
    sim->add_option("--horizon", sim_cfg.horizon, "censoring horizon (0 = diffusive default)");
    sim->add_option("--seed", sim_cfg.seed, "RNG seed")->default_val(42);
    sim->add_option("--scheme", sm_scheme, "exact-bm | euler")->default_val("exact-bm");
    sim->add_option("--workers", sim_cfg.workers, "worker threads")->default_val(1);
    sim->add_option("--out", sm_out, "ensemble CSV path");

    // selftest ----------------------------------------------------------------
    auto* self = app.add_subcommand("selftest", "run the acceptance suite");
    int st_only = 0;
    self->add_option("--only", st_only, "run a single criterion (1-13)");

    app.parse(argc, argv);

    if (laplace->parsed()) {
        const auto model = build_model(lp_m);
        json out;
        if (model.constant_coefficients()) {
            const ddlab::Coeffs c = model.coeffs(lp_x);
            out["value"] = ddlab::bm_laplace_ddu({c.mu, c.sigma}, lp_a, lp_b, lp_lambda);
            out["method"] = "bm-analytic";
        } else {
            out["value"] = ddlab::laplace_ddu(model, lp_x, lp_a, lp_b, lp_lambda, numerics);
            out["method"] = "dd-laplace";
        }
        emit(out);
        return 0;
    }

    if (prob->parsed()) {
        const auto model = build_model(pr_m);
        json out;
        if (model.constant_coefficients()) {
            const ddlab::Coeffs c = model.coeffs(pr_x);
            const ddlab::BmParams p{c.mu, c.sigma};
            const double l1 = ddlab::bm_laplace_ddu(p, pr_a, pr_b, 1e-10);
            const double l2 = ddlab::bm_laplace_ddu(p, pr_a, pr_b, 2e-10);
            const double l4 = ddlab::bm_laplace_ddu(p, pr_a, pr_b, 4e-10);
            out["value"] = (4.0 * (2.0 * l1 - l2) - (2.0 * l2 - l4)) / 3.0;
            out["method"] = "bm-analytic";
        } else {
            out["value"] = ddlab::precede_probability(model, pr_x, pr_a, pr_b, numerics);
            out["method"] = "dd-laplace";
        }
        emit(out);
        return 0;
    }

    if (density->parsed()) {
        const auto model = build_model(de_m);
        const TGrid grid = parse_tgrid(de_grid);
        std::ostream* os = &std::cout;
        std::ofstream file;
        if (!de_out.empty()) {
            file = open_out(de_out);
            os = &file;
        }
        (*os) << "t,density,converged\n";
        char buf[128];
        for (double t = grid.start; t <= grid.stop + 1e-12; t += grid.step) {
            double value;
            bool converged;
            if (model.constant_coefficients()) {
                const ddlab::Coeffs c = model.coeffs(de_x);
                const auto r = ddlab::density_ddu({c.mu, c.sigma}, de_a, de_b, t, series);
                if (r.converged) {
                    value = r.value;
                    converged = true;
                } else {
                    value = ddlab::invert_general(model, de_x, de_a, de_b, t, numerics);
                    converged = true;  // inversion fallback succeeded
                }
            } else {
                value = ddlab::invert_general(model, de_x, de_a, de_b, t, numerics);
                converged = true;
            }
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%d\n", t, value, converged ? 1 : 0);
            (*os) << buf;
        }
        return 0;
    }

    if (ph->parsed()) {
        const auto model = build_model(ph_m);
        json out;
        double a = ph_a, b = ph_b;
        ddlab::BmParams p{0.0, 1.0};
        bool analytic = false;
        if (ph_m.kind == "gbm") {
            // relative event on the price; physical log-drift nu = mu - sigma^2/2
            if (!(ph_alpha > 0.0) || !(ph_beta > 0.0)) {
                throw ddlab::ValidationError("prob-horizon on gbm requires --alpha and --beta");
            }
            std::tie(a, b) = ddlab::relative_to_log({ph_alpha, ph_beta});
            p = {ph_m.mu - 0.5 * ph_m.sigma * ph_m.sigma, ph_m.sigma};
            analytic = true;
        } else if (model.constant_coefficients()) {
            const ddlab::Coeffs c = model.coeffs(ph_x);
            p = {c.mu, c.sigma};
            analytic = true;
        }
        if (!(a > 0.0) || !(b > 0.0)) {
            throw ddlab::ValidationError("prob-horizon requires positive --a/--b (or alpha/beta)");
        }
        if (analytic) {
            const auto f = [&](double t) { return ddlab::density_ddu(p, a, b, t, series).value; };
            out["value"] = ddlab::integrate_adaptive(f, 0.0, ph_T, 1e-8, 400);
            out["method"] = "bm-analytic";
        } else {
            const auto f = [&](double t) {
                return ddlab::invert_general(model, ph_x, a, b, t, numerics);
            };
            out["value"] = ddlab::integrate_adaptive(f, 1e-6, ph_T, 1e-6, 60);
            out["method"] = "laplace-inversion";
        }
        emit(out);
        return 0;
    }

    if (price->parsed()) {
        ddlab::PricingSpec spec;
        spec.r = pc_r;
        spec.sigma = pc_sigma;
        spec.perpetual = pc_perp;
        if (pc_T_opt->count() > 0) spec.maturity = pc_T;
        const ddlab::RelativeEventSpec event{pc_alpha, pc_beta};
        json out;
        out["value"] = pc_perp ? ddlab::price_perpetual(event, spec)
                               : ddlab::price_finite(event, spec, series);
        out["method"] = pc_perp ? "perpetual" : "finite-maturity";
        emit(out);
        return 0;
    }

    if (misid->parsed()) {
        const auto model = build_model(mi_m);
        if ((mi_rate_opt->count() > 0) == (mi_life_opt->count() > 0)) {
            throw ddlab::ValidationError("misid requires exactly one of --rate and --life");
        }
        json out;
        if (mi_life_opt->count() > 0) {
            if (!model.constant_coefficients()) {
                throw ddlab::NotSupported(
                    "deterministic-life misidentification is offered for the bm model only; "
                    "use `ddlab simulate` for other models");
            }
            if (mi_a != mi_b) {
                throw ddlab::NotSupported(
                    "deterministic-life misidentification requires a = b; "
                    "use `ddlab simulate` otherwise");
            }
            const ddlab::Coeffs c = model.coeffs(mi_x);
            out["value"] = ddlab::misid_deterministic({c.mu, c.sigma}, mi_a, mi_life, series);
            out["method"] = "deterministic-life";
        } else {
            ddlab::SignalSpec spec{model, mi_a, mi_b, ddlab::LifeSpec::exponential(mi_rate), {}};
            if (!mi_density.empty()) {
                spec.start_density = ddlab::load_start_density_csv(mi_density);
                out["value"] = ddlab::misid_aggregate(spec, mi_x, numerics);
                out["method"] = "exponential-life-aggregate";
            } else {
                out["value"] = ddlab::misid_exponential(spec, mi_x, numerics);
                out["method"] = "exponential-life";
            }
        }
        emit(out);
        return 0;
    }

    if (sim->parsed()) {
        const auto model = build_model(sm_m);
        if (sm_scheme == "exact-bm") {
            sim_cfg.scheme = ddlab::SimScheme::exact_bm;
        } else if (sm_scheme == "euler") {
            sim_cfg.scheme = ddlab::SimScheme::euler;
        } else {
            throw ddlab::ValidationError("unknown scheme: " + sm_scheme);
        }
        const auto e = ddlab::simulate(model, sm_x, sm_a, sm_b, sim_cfg);
        if (!sm_out.empty()) {
            auto file = open_out(sm_out);
            ddlab::write_ensemble_csv(e, file);
        } else {
            ddlab::write_ensemble_csv(e, std::cout);
        }
        std::size_t dd_first = 0, censored = 0;
        for (const auto& r : e.records) {
            if (r.dd_first()) ++dd_first;
            if (r.censored_dd && r.censored_du) ++censored;
        }
        json out;
        out["paths"] = e.records.size();
        out["seed"] = e.config.seed;
        out["horizon"] = e.config.horizon;
        out["freq_dd_first"] = static_cast<double>(dd_first) / e.records.size();
        out["censored_both"] = censored;
        out["method"] = sm_scheme;
        if (!sm_out.empty()) emit(out);
        return 0;
    }

    if (self->parsed()) {
        ddlab::AcceptanceOptions opts;
        opts.cli_path = argv[0];
        opts.only = st_only;
        return ddlab::run_acceptance(opts) == 0 ? 0 : 2;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            CLI::App dummy;
            return dummy.exit(e);  // --help and friends
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ddlab::ValidationError& e) {
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 1;
    } catch (const ddlab::Error& e) {
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
