#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "ddlab/diffusion.hpp"

namespace ddlab {

enum class SimScheme { exact_bm, euler };

struct SimConfig {
    std::size_t paths = 100000;
    double dt = 1e-4;
    double horizon = 0.0;  // 0 picks the diffusive default 50 (max(a,b)/vol(x))^2
    std::uint64_t seed = 42;
    SimScheme scheme = SimScheme::exact_bm;
    int workers = 1;
};

// One simulated path's stopping data. Times equal the stop time when the
// corresponding event was not observed (censored flag set).
struct StoppingRecord {
    static constexpr std::uint32_t kNoStep = std::numeric_limits<std::uint32_t>::max();

    double t_dd = 0.0;
    double t_du = 0.0;
    bool censored_dd = true;
    bool censored_du = true;
    double x_at_dd = std::numeric_limits<double>::quiet_NaN();
    double sup_du_before_dd = 0.0;
    double x_end = 0.0;  // state at the stop time

    // grid diagnostics for the range-process identity
    double t_range = 0.0;
    std::uint32_t step_dd = kNoStep;
    std::uint32_t step_du = kNoStep;
    std::uint32_t step_range = kNoStep;

    bool dd_first() const {
        return !censored_dd && (censored_du || t_dd < t_du);
    }
};

struct StoppingEnsemble {
    SimConfig config;  // with the resolved horizon
    double x0 = 0.0;
    double a = 0.0;
    double b = 0.0;
    std::vector<StoppingRecord> records;
};

// Simulate paths until the first of: drawdown >= a, drawup >= b, horizon.
// Exact Gaussian increments for constant-coefficient models, Euler-Maruyama
// otherwise; crossing times are linearly interpolated within the step.
// Deterministic given (seed, paths, dt), independent of worker count.
StoppingEnsemble simulate(const DiffusionModel& model, double x, double a, double b,
                          const SimConfig& cfg);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    bool horizon_warning = false;
};

// Sample mean of e^{-lambda t_dd} 1{drawdown first, not censored}.
Estimate estimate_laplace(const StoppingEnsemble& e, double lambda);

// Frequency of {t_dd <= T and drawdown first}.
Estimate estimate_finite_horizon(const StoppingEnsemble& e, double T);

struct RangeIdentityReport {
    std::size_t paths_checked = 0;
    std::size_t violations = 0;
};

// Checks per path that the first time the discretized range reaches a equals
// min(T_D(a), T_U(a)) on the same grid (requires an a = b ensemble).
RangeIdentityReport verify_range_identity(const StoppingEnsemble& e);

// CSV dump: path_id,t_dd,t_du,censored_dd,censored_du,x_at_dd,sup_du_before_dd
void write_ensemble_csv(const StoppingEnsemble& e, std::ostream& out);

}  // namespace ddlab
