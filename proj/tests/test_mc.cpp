#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddlab/bm_analytic.hpp"
#include "ddlab/dd_laplace.hpp"
#include "ddlab/mc.hpp"
#include "ddlab/rng.hpp"
#include "doctest.h"

using namespace ddlab;

namespace {

SimConfig quick(std::size_t paths, double dt, double horizon = 0.0) {
    SimConfig cfg;
    cfg.paths = paths;
    cfg.dt = dt;
    cfg.horizon = horizon;
    return cfg;
}

// Kolmogorov-Smirnov distance against the standard normal
double ks_against_normal(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double cdf = 0.5 * std::erfc(-xs[i] * M_SQRT1_2);
        d = std::max(d, std::fabs(cdf - (i + 1) / n));
        d = std::max(d, std::fabs(cdf - i / n));
    }
    return d;
}

}  // namespace

TEST_CASE("huge barriers censor every path") {
    const auto m = DiffusionModel::brownian(0.0, 1.0);
    const auto e = simulate(m, 0.0, 500.0, 500.0, quick(200, 1e-2, 2.0));
    for (const auto& r : e.records) {
        CHECK(r.censored_dd);
        CHECK(r.censored_du);
        CHECK(r.t_dd == doctest::Approx(2.0));
    }
}

TEST_CASE("symmetric driftless case splits 50/50") {
    const auto m = DiffusionModel::brownian(0.0, 1.0);
    const auto e = simulate(m, 0.0, 1.0, 1.0, quick(100000, 1e-4, 30.0));
    std::size_t dd_first = 0, censored = 0;
    for (const auto& r : e.records) {
        if (r.dd_first()) ++dd_first;
        if (r.censored_dd && r.censored_du) ++censored;
    }
    CHECK(censored == 0);
    const double freq = static_cast<double>(dd_first) / e.records.size();
    CHECK(freq == doctest::Approx(0.5).epsilon(3.0 * 0.0016 / 0.5));
}

TEST_CASE("laplace estimator agrees with the closed form") {
    const auto m = DiffusionModel::brownian(0.0, 1.0);
    const auto e = simulate(m, 0.0, 1.0, 1.0, quick(100000, 1e-4, 40.0));
    const auto est = estimate_laplace(e, 0.5);
    CHECK_FALSE(est.horizon_warning);
    const double closed = bm_laplace_equal({0.0, 1.0}, 1.0, 0.5);
    CHECK(std::fabs(est.value - closed) < 3.0 * est.std_error + 0.003);

    const auto huge = estimate_laplace(e, 200.0);
    CHECK(huge.value < 1e-4);
}

TEST_CASE("laplace estimator covers the mean-reverting pipeline") {
    const auto ou = DiffusionModel::ornstein_uhlenbeck(0.0, 1.0, 1.0);
    SimConfig cfg = quick(30000, 2.5e-5, 20.0);
    cfg.scheme = SimScheme::euler;
    const auto e = simulate(ou, 0.0, 0.5, 0.5, cfg);
    const auto est = estimate_laplace(e, 1.0);
    const double analytic = laplace_equal(ou, 0.0, 0.5, 1.0);
    CHECK(std::fabs(est.value - analytic) < 3.0 * est.std_error + 0.004);
}

TEST_CASE("log-scale geometric dynamics: dd-larger transform vs simulation") {
    // log of a stock with 5% drift and 20% vol: nu = 0.05 - 0.02
    const auto m = DiffusionModel::brownian(0.03, 0.2);
    const auto e = simulate(m, 0.0, 0.2, 0.1, quick(100000, 2.5e-5, 6.0));
    const auto est = estimate_laplace(e, 0.3);
    const double analytic = laplace_dd_larger(m, 0.0, 0.2, 0.1, 0.3);
    CHECK(std::fabs(est.value - analytic) < 3.0 * est.std_error + 0.003);
}

TEST_CASE("precede probability vs drawdown-first frequency") {
    const auto m = DiffusionModel::brownian(0.5, 1.0);
    const auto e = simulate(m, 0.0, 1.0, 1.0, quick(200000, 1e-4, 40.0));
    std::size_t dd_first = 0;
    for (const auto& r : e.records) dd_first += r.dd_first();
    const double freq = static_cast<double>(dd_first) / e.records.size();
    const double se = std::sqrt(freq * (1.0 - freq) / e.records.size());
    const double analytic = precede_probability(m, 0.0, 1.0, 1.0);
    CHECK(std::fabs(freq - analytic) < 3.0 * se + 0.003);
}

TEST_CASE("finite-horizon estimator is monotone and anchored at zero") {
    const auto m = DiffusionModel::brownian(0.3, 1.0);
    const auto e = simulate(m, 0.0, 1.0, 0.8, quick(20000, 6.4e-5, 2.0));
    CHECK(estimate_finite_horizon(e, 0.0).value == 0.0);
    double prev = -1.0;
    for (double T : {0.25, 0.5, 1.0, 1.5, 2.0}) {
        const double v = estimate_finite_horizon(e, T).value;
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(estimate_finite_horizon(e, 3.0), ValidationError);
}

TEST_CASE("range identity holds pathwise on the grid") {
    const auto bm0 = DiffusionModel::brownian(0.0, 1.0);
    const auto bm5 = DiffusionModel::brownian(0.5, 1.0);
    const auto ou = DiffusionModel::ornstein_uhlenbeck(0.0, 1.0, 1.0);
    SimConfig cfg = quick(10000, 1e-4, 10.0);
    for (const auto* m : {&bm0, &bm5}) {
        const auto e = simulate(*m, 0.0, 1.0, 1.0, cfg);
        const auto rep = verify_range_identity(e);
        CHECK(rep.paths_checked == 10000);
        CHECK(rep.violations == 0);
    }
    SimConfig ocfg = quick(10000, 2.5e-5, 10.0);
    ocfg.scheme = SimScheme::euler;
    const auto oe = simulate(ou, 0.0, 0.5, 0.5, ocfg);
    CHECK(verify_range_identity(oe).violations == 0);

    const auto uneven = simulate(bm0, 0.0, 1.0, 0.9, quick(10, 8e-5, 1.0));
    CHECK_THROWS_AS(verify_range_identity(uneven), ValidationError);
}

TEST_CASE("identical seeds reproduce; worker count does not matter") {
    const auto m = DiffusionModel::brownian(0.2, 1.0);
    const auto e1 = simulate(m, 0.0, 0.8, 0.8, quick(500, 6e-5, 5.0));
    const auto e2 = simulate(m, 0.0, 0.8, 0.8, quick(500, 6e-5, 5.0));
    SimConfig three = quick(500, 6e-5, 5.0);
    three.workers = 3;
    const auto e3 = simulate(m, 0.0, 0.8, 0.8, three);
    for (std::size_t i = 0; i < 500; ++i) {
        CHECK(e1.records[i].t_dd == e2.records[i].t_dd);
        CHECK(e1.records[i].t_du == e3.records[i].t_du);
        CHECK(e1.records[i].x_end == e3.records[i].x_end);
    }

    SimConfig other = quick(500, 6e-5, 5.0);
    other.seed = 43;
    const auto e4 = simulate(m, 0.0, 0.8, 0.8, other);
    std::size_t same = 0;
    for (std::size_t i = 0; i < 500; ++i) {
        if (e1.records[i].x_end == e4.records[i].x_end) ++same;
    }
    CHECK(same < 5);
}

TEST_CASE("generator normals pass a KS test at the 1 percent level") {
    std::vector<double> z(100000);
    for (std::size_t i = 0; i < z.size(); ++i) {
        detail::CounterRng rng(42, i);
        z[i] = rng.next_normal();
    }
    const double d = ks_against_normal(z);
    CHECK(d < 1.63 / std::sqrt(100000.0));  // 1% critical value
}

TEST_CASE("exact scheme terminal values are Gaussian at a fixed time") {
    const double mu = 0.4, sigma = 1.3, t = 0.7, x0 = 0.2;
    const auto m = DiffusionModel::brownian(mu, sigma);
    // barriers far out of reach make horizon the stop time for every path
    const auto e = simulate(m, x0, 1e9, 1e9, quick(100000, t / 64.0, t));
    std::vector<double> z(e.records.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = (e.records[i].x_end - (x0 + mu * t)) / (sigma * std::sqrt(t));
    }
    CHECK(ks_against_normal(z) < 1.63 / std::sqrt(100000.0));
}

TEST_CASE("longer horizons only resolve more drawdown-first events") {
    const auto m = DiffusionModel::brownian(0.1, 1.0);
    const auto short_e = simulate(m, 0.0, 1.0, 1.0, quick(20000, 1e-4, 1.0));
    const auto long_e = simulate(m, 0.0, 1.0, 1.0, quick(20000, 1e-4, 2.0));
    std::size_t nshort = 0, nlong = 0;
    for (std::size_t i = 0; i < 20000; ++i) {
        nshort += short_e.records[i].dd_first();
        nlong += long_e.records[i].dd_first();
    }
    CHECK(nlong >= nshort);
}

TEST_CASE("csv dump has the documented schema") {
    const auto m = DiffusionModel::brownian(0.0, 1.0);
    const auto e = simulate(m, 0.0, 0.5, 0.5, quick(3, 1e-5, 0.5));
    std::ostringstream out;
    write_ensemble_csv(e, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "path_id,t_dd,t_du,censored_dd,censored_du,x_at_dd,sup_du_before_dd");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 6);
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("configuration validation") {
    const auto m = DiffusionModel::brownian(0.0, 1.0);
    CHECK_THROWS_AS(simulate(m, 0.0, 1.0, 1.0, quick(1000, 1e-2, 1.0)), ValidationError);
    CHECK_THROWS_AS(simulate(m, 0.0, 1.0, 1.0, quick(0, 1e-4, 1.0)), ValidationError);
    SimConfig euler_on_bm = quick(10, 1e-4, 1.0);
    euler_on_bm.scheme = SimScheme::euler;
    CHECK_NOTHROW(simulate(m, 0.0, 1.0, 1.0, euler_on_bm));
    const auto ou = DiffusionModel::ornstein_uhlenbeck(0.0, 1.0, 1.0);
    CHECK_THROWS_AS(simulate(ou, 0.0, 1.0, 1.0, quick(10, 1e-4, 1.0)), ValidationError);
}
