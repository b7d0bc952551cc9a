#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ddlab/apps.hpp"
#include "ddlab/mc.hpp"
#include "ddlab/rng.hpp"
#include "doctest.h"

using namespace ddlab;

TEST_CASE("relative sizes map to log drawdown/drawup sizes") {
    {
        const auto [a, b] = relative_to_log({0.5, 1.0});
        CHECK(a == doctest::Approx(std::log(2.0)).epsilon(1e-14));
        CHECK(b == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    }
    {
        const auto [a, b] = relative_to_log({0.2, 0.25});
        CHECK(a == doctest::Approx(0.22314).epsilon(1e-4));
        CHECK(b == doctest::Approx(0.22314).epsilon(1e-4));
        CHECK(a == doctest::Approx(b).epsilon(1e-12));  // delta = 1 boundary case
    }
    {
        const auto [a, b] = relative_to_log({0.2, 0.1});
        CHECK(a == doctest::Approx(0.22314).epsilon(1e-4));
        CHECK(b == doctest::Approx(0.09531).epsilon(1e-4));
        CHECK(a > b);
    }
    CHECK_THROWS_AS(relative_to_log({1.2, 0.1}), ValidationError);
}

TEST_CASE("perpetual digital price is a discounted probability") {
    PricingSpec p;
    p.sigma = 0.3;
    p.perpetual = true;

    double prev = 1.1;
    for (double r : {0.02, 0.05, 0.1, 0.2}) {
        p.r = r;
        const double v = price_perpetual({0.2, 0.2}, p);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v < prev);  // discounting
        prev = v;
    }

    // a wider relative-rise trigger leaves the drawdown more room to win
    p.r = 0.05;
    prev = -1.0;
    for (double beta : {0.1, 0.2, 0.3, 0.5}) {
        const double v = price_perpetual({0.2, beta}, p);
        CHECK(v >= prev - 1e-9);
        prev = v;
    }

    // r -> 0+ approaches the undiscounted precede probability
    p.r = 1e-9;
    const auto [a, b] = relative_to_log({0.2, 0.2});
    const double nu = p.r - 0.045;
    const double prob = bm_laplace_ddu({nu, 0.3}, a, b, 1e-10);
    CHECK(price_perpetual({0.2, 0.2}, p) == doctest::Approx(prob).epsilon(1e-4));
}

TEST_CASE("perpetual price agrees with a discounted-payoff simulation") {
    PricingSpec p;
    p.sigma = 0.3;
    p.r = 0.05;
    p.perpetual = true;
    const double price = price_perpetual({0.2, 0.2}, p);

    const auto [a, b] = relative_to_log({0.2, 0.2});
    const double nu = p.r - 0.5 * p.sigma * p.sigma;
    const auto m = DiffusionModel::brownian(nu, p.sigma);
    SimConfig cfg;
    cfg.paths = 50000;
    cfg.dt = 3.5e-5;
    cfg.horizon = 280.0;  // e^{-r h} < 1e-6
    const auto e = simulate(m, 0.0, a, b, cfg);
    const auto est = estimate_laplace(e, p.r);
    CHECK_FALSE(est.horizon_warning);
    CHECK(std::fabs(price - est.value) < 3.0 * est.std_error + 0.003);
}

TEST_CASE("finite-maturity price: limits, monotonicity, simulation check") {
    PricingSpec perp;
    perp.sigma = 0.3;
    perp.r = 0.05;
    perp.perpetual = true;
    const double horizon_price = price_perpetual({0.2, 0.2}, perp);

    PricingSpec p;
    p.sigma = 0.3;
    p.r = 0.05;

    p.maturity = 1e-6;
    CHECK(price_finite({0.2, 0.2}, p) == doctest::Approx(0.0).epsilon(1e-9));

    double prev = -1.0;
    for (double T : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
        p.maturity = T;
        const double v = price_finite({0.2, 0.2}, p);
        CHECK(v >= prev - 1e-6);  // slack for quadrature noise at saturation
        CHECK(v <= horizon_price + 1e-6);
        prev = v;
    }
    CHECK(prev == doctest::Approx(horizon_price).epsilon(1e-3));

    // discounted payoff with maturity cutoff, alpha != beta exercises b > a
    p.maturity = 1.0;
    const double price = price_finite({0.2, 0.25}, p);
    const auto [a, b] = relative_to_log({0.2, 0.25});
    const auto m = DiffusionModel::brownian(p.r - 0.045, p.sigma);
    SimConfig cfg;
    cfg.paths = 50000;
    cfg.dt = 3.5e-5;
    cfg.horizon = 1.0;
    const auto e = simulate(m, 0.0, a, b, cfg);
    double sum = 0.0, sumsq = 0.0;
    for (const auto& r : e.records) {
        const double v = (r.dd_first() && r.t_dd <= 1.0) ? std::exp(-p.r * r.t_dd) : 0.0;
        sum += v;
        sumsq += v * v;
    }
    const double n = static_cast<double>(e.records.size());
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / (n - 1.0));
    CHECK(std::fabs(price - mean) < 3.0 * se + 0.003);
}

TEST_CASE("exponential-life misidentification") {
    // the transform value at the life rate; below one half at symmetry since
    // the signal can die before either alarm fires
    SignalSpec sym{DiffusionModel::brownian(0.0, 1.0), 1.0, 1.0, LifeSpec::exponential(0.7), {}};
    CHECK(misid_exponential(sym, 0.0) ==
          doctest::Approx(bm_laplace_equal({0.0, 1.0}, 1.0, 0.7)).epsilon(1e-12));
    CHECK(misid_exponential(sym, 0.0) < 0.5);

    // a long-lived signal approaches the plain precede probability
    SignalSpec slow{DiffusionModel::brownian(0.5, 1.0), 1.0, 1.0, LifeSpec::exponential(1e-9), {}};
    const double prob = precede_probability(DiffusionModel::brownian(0.5, 1.0), 0.0, 1.0, 1.0);
    CHECK(misid_exponential(slow, 0.0) == doctest::Approx(prob).epsilon(1e-3));

    // general-diffusion route
    SignalSpec ou{DiffusionModel::ornstein_uhlenbeck(0.0, 1.0, 1.0), 0.6, 0.6,
                  LifeSpec::exponential(1.0), {}};
    CHECK(misid_exponential(ou, 0.0) ==
          doctest::Approx(laplace_equal(ou.model, 0.0, 0.6, 1.0)).epsilon(1e-9));

    // negating the drift and swapping thresholds gives the complementary
    // detector's miss probability; at the symmetric point the two coincide
    SignalSpec fwd{DiffusionModel::brownian(0.0, 1.0), 0.7, 0.7, LifeSpec::exponential(0.9), {}};
    SignalSpec swp{DiffusionModel::brownian(-0.0, 1.0), 0.7, 0.7, LifeSpec::exponential(0.9), {}};
    CHECK(misid_exponential(fwd, 0.0) == doctest::Approx(misid_exponential(swp, 0.0)).epsilon(1e-14));
    // away from symmetry: the swapped detector seen through the mirrored model
    SignalSpec da{DiffusionModel::brownian(0.4, 1.0), 0.7, 1.1, LifeSpec::exponential(0.9), {}};
    SignalSpec db{DiffusionModel::brownian(-0.4, 1.0), 1.1, 0.7, LifeSpec::exponential(0.9), {}};
    const double miss_complement = misid_exponential(db, 0.0);
    CHECK(miss_complement ==
          doctest::Approx(bm_laplace_ddu({-0.4, 1.0}, 1.1, 0.7, 0.9)).epsilon(1e-12));
    CHECK(misid_exponential(da, 0.0) + miss_complement < 1.0);  // the signal can die first

    SignalSpec det{DiffusionModel::brownian(0.0, 1.0), 1.0, 1.0, LifeSpec::deterministic(1.0), {}};
    CHECK_THROWS_AS(misid_exponential(det, 0.0), ValidationError);
}

TEST_CASE("misidentification vs exponentially censored paths") {
    const double mu = 0.5, rate = 0.5;
    SignalSpec spec{DiffusionModel::brownian(mu, 1.0), 1.0, 1.0, LifeSpec::exponential(rate), {}};
    const double analytic = misid_exponential(spec, 0.0);

    SimConfig cfg;
    cfg.paths = 100000;
    cfg.dt = 1e-4;
    cfg.horizon = 40.0;
    const auto e = simulate(spec.model, 0.0, 1.0, 1.0, cfg);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < e.records.size(); ++i) {
        detail::CounterRng life_rng(e.config.seed ^ 0x5eedf00dULL, i);
        const double zeta = life_rng.next_exponential(rate);
        const auto& r = e.records[i];
        if (r.dd_first() && r.t_dd < zeta) ++hits;
    }
    const double freq = static_cast<double>(hits) / e.records.size();
    const double se = std::sqrt(freq * (1.0 - freq) / e.records.size());
    CHECK(std::fabs(analytic - freq) < 3.0 * se + 0.003);
}

TEST_CASE("aggregate misidentification over a tabulated start density") {
    const auto ou = DiffusionModel::ornstein_uhlenbeck(0.0, 1.0, 1.0);
    SignalSpec base{ou, 0.6, 0.6, LifeSpec::exponential(1.0), {}};

    // narrow triangle at y0: mass one, collapses to the single-start value
    const double y0 = 0.1, eps = 0.01;
    SignalSpec tri = base;
    tri.start_density = StartDensity{{y0 - eps, y0, y0 + eps}, {0.0, 1.0 / eps, 0.0}};
    CHECK(misid_aggregate(tri, 0.0) ==
          doctest::Approx(misid_exponential(base, y0)).epsilon(1e-3));

    // two-point mixture averages the single-start values
    const double y1 = -0.2, y2 = 0.3;
    SignalSpec mix = base;
    mix.start_density = StartDensity{
        {y1 - eps, y1, y1 + eps, y2 - eps, y2, y2 + eps},
        {0.0, 0.5 / eps, 0.0, 0.0, 0.5 / eps, 0.0}};
    const double avg =
        0.5 * (misid_exponential(base, y1) + misid_exponential(base, y2));
    CHECK(misid_aggregate(mix, 0.0) == doctest::Approx(avg).epsilon(1e-3));

    SignalSpec bad = base;
    bad.start_density = StartDensity{{0.0, 1.0}, {1.0, 3.0}};
    CHECK_THROWS_AS(misid_aggregate(bad, 0.0), DensityNotNormalized);
}

TEST_CASE("deterministic-life misidentification") {
    // symmetric case saturates at one half
    CHECK(misid_deterministic({0.0, 1.0}, 1.0, 60.0) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(misid_deterministic({0.0, 1.0}, 1.0, 1e-6) == doctest::Approx(0.0).epsilon(1e-9));

    const double analytic = misid_deterministic({0.5, 1.0}, 1.0, 2.0);
    SimConfig cfg;
    cfg.paths = 100000;
    cfg.dt = 1e-4;
    cfg.horizon = 2.0;
    const auto e = simulate(DiffusionModel::brownian(0.5, 1.0), 0.0, 1.0, 1.0, cfg);
    const auto est = estimate_finite_horizon(e, 2.0);
    CHECK(std::fabs(analytic - est.value) < 3.0 * est.std_error + 0.003);
}

TEST_CASE("start-density csv loader") {
    const char* path = "start_density_test.csv";
    {
        std::ofstream out(path);
        out << "y,f\n-0.5,0.0\n0.0,2.0\n0.5,0.0\n";
    }
    const auto d = load_start_density_csv(path);
    CHECK(d.y.size() == 3);
    CHECK(d.f[1] == 2.0);
    std::remove(path);

    {
        std::ofstream out(path);
        out << "y,f\n0.5,0.0\n0.0,2.0\n";
    }
    CHECK_THROWS_AS(load_start_density_csv(path), ValidationError);
    std::remove(path);
}

TEST_CASE("pricing validation") {
    PricingSpec p;
    p.sigma = 0.3;
    CHECK_THROWS_AS(price_perpetual({0.2, 0.2}, p), ValidationError);  // neither flag
    p.perpetual = true;
    p.maturity = 1.0;
    CHECK_THROWS_AS(price_perpetual({0.2, 0.2}, p), ValidationError);  // both
    p.maturity.reset();
    p.r = 0.0;
    CHECK_THROWS_AS(price_perpetual({0.2, 0.2}, p), ValidationError);  // r = 0 perpetual
}
