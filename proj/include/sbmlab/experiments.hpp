#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sbmlab/grid.hpp"
#include "sbmlab/initial_data.hpp"
#include "sbmlab/spde.hpp"
#include "sbmlab/stats.hpp"

namespace sbm {

// Longtime-behavior experiments. The t -> infinity statements are mapped to
// finite-horizon, falsifiable criteria: monotone trends with a one-stderr
// slack plus a threshold at the horizon, evaluated on replica ensembles.
// Total-mass martingale means are asserted simultaneously with the decreasing
// medians: extinction happens almost surely while the expectation stays flat.

struct CheckpointStats {
    double t = 0.0;
    double mean = 0.0;
    double stderr_mean = 0.0;
    double median = 0.0;
    double q10 = 0.0;
    double q90 = 0.0;
    double frac_above = 0.0;  // fraction of replicas with value > epsilon
};

struct ObservableSeries {
    std::string name;
    double epsilon = 0.0;  // threshold for frac_above
    std::vector<CheckpointStats> rows;
};

struct Verdict {
    std::string criterion;
    bool pass = false;
    std::string detail;
};

struct LongtimeReport {
    std::vector<double> times;  // checkpoint times (t = 0 included)
    std::vector<ObservableSeries> series;
    std::vector<Verdict> verdicts;
    long clip_events = 0;

    bool pass() const;
    const ObservableSeries* find(const std::string& name) const;
};

/// Shared ensemble settings for the stochastic longtime experiments.
struct LongtimeConfig {
    GridSpec grid;
    SchemeParams scheme;
    double horizon = 0.0;
    int n_steps = 0;                    // dt = horizon / n_steps
    std::vector<int> checkpoint_steps;  // strictly increasing, first may be 0
    int replicas = 0;
    std::uint64_t base_seed = 0;
    std::uint64_t stream_block = 0;
    int workers = 1;
    double z_max = 4.0;           // martingale-mean tolerance in combined stderr units
    double epsilon_frac = 0.1;    // epsilon = epsilon_frac * initial observable
    double final_fraction_max = 0.3;
    double sqrt_mass_decay_factor = 2.0;   // required decay of E[sqrt(mass)]
    double median_final_tol = 0.35;        // |median - target| tolerance at horizon

    double dt() const { return n_steps > 0 ? horizon / n_steps : 0.0; }
    void validate() const;
};

/// Deterministic heat-flow suite: mass conservation, discrete maximum
/// principle, L1 convergence to (total mass) * kernel for integrable-type
/// data, decay of the negative-part mass for sign-changing data with
/// nonnegative mass, the sup-norm bound, and pointwise flattening to the
/// grid mean. Sub-checks engage according to what the descriptor supports.
/// Requires sqrt(horizon) <= L/4 so wrap-around stays negligible.
struct HeatSuiteConfig {
    GridSpec grid;
    InitialData data;
    double lambda = 0.5;
    double horizon = 1.0;
    int checkpoints = 8;
    double l1_tolerance = 0.05;       // L1 distance to mass * kernel at horizon
    double flat_tolerance = 1e-4;     // sup |u - mean| at horizon for bounded data
    bool kernel_comparison = true;    // compare against mass * p_t (integrable-type data)
};

LongtimeReport heat_longtime_suite(const HeatSuiteConfig& cfg);

/// Dual-field decay: <V_t, g> -> 0 in probability while <V_t, 1> stays a
/// mean-constant martingale; E[sqrt(<V_t, 1>)] must fall by the configured
/// factor over the horizon.
LongtimeReport pam_decay_experiment(const InitialData& v0, const InitialData& g,
                                    const LongtimeConfig& cfg);

/// Total-mass extinction of the smaller population for integrable initial
/// data: median <U2_t, 1> decreasing and below 0.2 <psi, 1> at the horizon,
/// median <U1_t, 1> near <phi - psi, 1>, mean masses flat. Swaps (phi, psi)
/// if psi carries more mass.
LongtimeReport global_extinction_experiment(const InitialData& phi, const InitialData& psi,
                                            const LongtimeConfig& cfg);

/// Local extinction for bounded initial data with means: fraction of
/// replicas with <U2_t, g> above epsilon decreasing and small at the
/// horizon; median <U1_t, g> near (mean(phi) - mean(psi)) <g, 1>.
LongtimeReport local_extinction_experiment(const InitialData& phi, const InitialData& psi,
                                           const InitialData& g, const LongtimeConfig& cfg);

}  // namespace sbm
