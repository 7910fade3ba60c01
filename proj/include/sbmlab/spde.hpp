#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbmlab/grid.hpp"
#include "sbmlab/initial_data.hpp"
#include "sbmlab/noise.hpp"

namespace sbm {

/// How a step restores nonnegativity.
///  - ClipState: clip the state at 0 after the full update (default). Clip
///    events inject the overshoot back into the field; the bias is counted,
///    monitored and vanishes under dt/dx refinement for short horizons.
///  - FullTruncation: evolve the state unclipped with the diffusion
///    coefficient evaluated at positive parts and report the clipped fields.
///    No boundary injection: the state total mass stays an exact martingale
///    and the longtime extinction structure survives at desk resolution.
///  - Off: raw unclipped update; exact-cancellation checks use this.
enum class NegativityPolicy { ClipState, FullTruncation, Off };

/// Explicit Euler-Maruyama step parameters. lambda = dt/dx^2 must be <= 1.
/// noise_scale / drift_scale / rho_override are fault-injection knobs used by
/// the statistical power checks; they default to the faithful scheme.
struct SchemeParams {
    double dt = 0.0;
    bool clip_negative = true;  // false selects NegativityPolicy::Off
    NegativityPolicy negativity = NegativityPolicy::ClipState;
    double noise_scale = 1.0;
    double drift_scale = 1.0;
    std::optional<double> rho_override;

    NegativityPolicy policy() const {
        return clip_negative ? negativity : NegativityPolicy::Off;
    }
    double lambda(const GridSpec& spec) const { return dt / (spec.dx * spec.dx); }
    void validate(const GridSpec& spec) const;
};

/// Two-population state (U1, U2) with branching noise sqrt(U1 U2) and
/// noise correlation rho in [-1, 1].
struct SbmState {
    GridFunction u1;
    GridFunction u2;
    double t = 0.0;
    double rho = 1.0;

    void validate() const;
};

/// Linear multiplicative-noise state V >= 0.
struct PamState {
    GridFunction v;
    double t = 0.0;

    void validate() const;
};

/// Per-run counters: clipping events are counted, never hidden.
struct StepStats {
    long clip_events = 0;
};

/// Scratch buffers reused across steps; one per replica thread.
struct StepWorkspace {
    std::vector<double> a;
    std::vector<double> b;
};

/// U_i' = U_i + (dt/2) Lap_h U_i + sqrt(max(U1 U2, 0)) xi_i sqrt(dt/dx),
/// then clip at 0 componentwise (events counted, never hidden). The pair
/// (xi, xi2) must have been generated with the state's rho (or
/// params.rho_override during fault injection). Before clipping, the shared
/// noise cancels exactly in U1 - U2 at rho = 1 and in U1 + U2 at rho = -1;
/// clip events perturb those identities, so exact-cancellation runs disable
/// clipping.
void step_sbm(SbmState& s, const SchemeParams& p, const NoiseIncrement& n, StepStats& stats,
              StepWorkspace& ws);

/// V' = V + (dt/2) Lap_h V + V xi sqrt(dt/dx), then clip at 0.
void step_pam(PamState& s, const SchemeParams& p, const NoiseIncrement& n, StepStats& stats,
              StepWorkspace& ws);

/// Pure single-step wrappers matching the value-semantics contract.
SbmState step_sbm(const SbmState& s, const SchemeParams& p, const NoiseIncrement& n);
PamState step_pam(const PamState& s, const SchemeParams& p, const NoiseIncrement& n);

/// X = U1 + U2, Y = U1 - U2. A derived view: stepping (U1, U2) with shared
/// noise already realizes the sqrt(X^2 - Y^2) dynamics for X.
std::pair<GridFunction, GridFunction> xy_view(const SbmState& s);

/// Advances the state n_steps steps, drawing one correlated pair per step,
/// and calls on_step(step_index, state) after each step (step_index >= 1).
template <class OnStep>
void run_sbm(SbmState& s, const SchemeParams& p, NoiseGenerator& gen, int n_steps,
             StepStats& stats, OnStep&& on_step) {
    StepWorkspace ws;
    const double rho = p.rho_override.value_or(s.rho);
    for (int k = 1; k <= n_steps; ++k) {
        const NoiseIncrement inc = correlated_pair(gen, s.u1.spec.points, rho);
        step_sbm(s, p, inc, stats, ws);
        on_step(k, s);
    }
}

template <class OnStep>
void run_pam(PamState& s, const SchemeParams& p, NoiseGenerator& gen, int n_steps,
             StepStats& stats, OnStep&& on_step) {
    StepWorkspace ws;
    for (int k = 1; k <= n_steps; ++k) {
        const NoiseIncrement inc = white_increment(gen, s.v.spec.points);
        step_pam(s, p, inc, stats, ws);
        on_step(k, s);
    }
}

/// Which field a recorded observable pairs against.
enum class ObservableTarget { U1, U2, X, Y, V };

struct ObservableSpec {
    std::string name;
    ObservableTarget target = ObservableTarget::U1;
    /// Test function g; empty means g = 1 (a total mass).
    std::optional<GridFunction> weight;
};

struct Trajectory {
    std::vector<double> times;                           // checkpoint times
    std::map<std::string, std::vector<double>> series;   // observable -> per-checkpoint value
    std::vector<std::pair<std::string, GridFunction>> fields;  // optional full snapshots
    StepStats stats;
};

/// Deterministic function of (initial state, params, seed): records the
/// requested observables at each checkpoint step (step indices, strictly
/// increasing, each <= n_steps; index 0 records the initial state).
Trajectory simulate_sbm(const SbmState& initial, const SchemeParams& p, SeedSpec seed,
                        int n_steps, const std::vector<int>& checkpoint_steps,
                        const std::vector<ObservableSpec>& observables,
                        bool record_fields = false);

Trajectory simulate_pam(const PamState& initial, const SchemeParams& p, SeedSpec seed,
                        int n_steps, const std::vector<int>& checkpoint_steps,
                        const std::vector<ObservableSpec>& observables,
                        bool record_fields = false);

}  // namespace sbm
