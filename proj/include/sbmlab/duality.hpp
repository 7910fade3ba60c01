#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbmlab/grid.hpp"
#include "sbmlab/noise.hpp"
#include "sbmlab/spde.hpp"
#include "sbmlab/stats.hpp"

namespace sbm {

// Monte Carlo verification of the branching/Anderson duality
//
//   E[exp(-<X_T, phi>)] = E[exp(-<X_0, V_T> - 1/2 int_0^T <V_r^2, Y_{T-r}^2> dr)]
//
// where X = U1 + U2 solves the rho = 1 two-population system, V is the dual
// linear multiplicative-noise field started from phi, and Y_t is the
// deterministic heat evolution of U1_0 - U2_0. Both sides are estimated on
// independent replica ensembles and compared with a two-sample z test.

struct DualityConfig {
    GridSpec grid;
    GridFunction u1_0;
    GridFunction u2_0;
    GridFunction phi;
    double horizon = 0.0;         // T
    int n_steps = 0;              // dt = T / n_steps; 0 steps allowed when T = 0
    SchemeParams scheme;          // scheme.dt must equal horizon / n_steps
    std::uint64_t base_seed = 0;
    int replicas = 0;
    std::uint64_t stream_block_lhs = 0;          // replica k uses stream_block + k
    std::uint64_t stream_block_rhs = 1ull << 32;
    int workers = 1;
    double z_max = 4.0;

    double dt() const;
    void validate() const;
};

struct EnsembleResult {
    MCEstimate estimate;
    std::vector<double> samples;  // per-replica values, replica order
    long clip_events = 0;
};

/// Mean of exp(-<X_T, phi>) over independent rho = 1 replicas.
EnsembleResult duality_lhs(const DualityConfig& cfg);

/// Mean of exp(-<X_0, V_T> - I/2) over independent dual replicas, where I is
/// the trapezoidal quadrature of r -> <V_r^2, Y_{T-r}^2> on the step grid and
/// Y is precomputed once (it is deterministic and consumes no replica
/// randomness).
EnsembleResult duality_rhs(const DualityConfig& cfg);

struct DualityReport {
    MCEstimate lhs;
    MCEstimate rhs;
    double z = 0.0;
    bool pass = false;
    std::string note;
    long clip_events_lhs = 0;
    long clip_events_rhs = 0;
};

DualityReport duality_check(const DualityConfig& cfg);

/// Self-duality of the linear multiplicative-noise field:
/// E[exp(-<V'_T, psi>)] with V'_0 = phi equals E[exp(-<phi, V_T>)] with
/// V_0 = psi, on two independent ensembles. Swapping (phi, psi) together
/// with the two stream blocks reproduces the mirrored report exactly.
struct SelfDualityConfig {
    GridSpec grid;
    GridFunction phi;   // initial condition of the ensemble paired against psi
    GridFunction psi;
    double horizon = 0.0;
    int n_steps = 0;
    SchemeParams scheme;
    std::uint64_t base_seed = 0;
    int replicas = 0;
    std::uint64_t stream_block_lhs = 0;
    std::uint64_t stream_block_rhs = 1ull << 32;
    int workers = 1;
    double z_max = 4.0;

    double dt() const;
    void validate() const;
};

DualityReport self_duality_check(const SelfDualityConfig& cfg);

/// Martingale-structure check for X: with G_s = S_s phi precomputed on the
/// step grid, M_t = <X_t, G_{T-t}> - <X_0, G_T> should have zero mean at
/// every checkpoint (first-moment flatness), and M_t^2 should match the
/// running bracket B_t = int_0^t <X_s^2 - Y_s^2, G_{T-s}^2> ds in
/// expectation. Both are scored as z statistics; the variance comparison
/// uses the paired per-replica differences M_t^2 - B_t (mean zero when the
/// bracket matches), which accounts for the correlation between the two.
struct MpCheckConfig {
    DualityConfig base;
    std::vector<int> checkpoint_steps;
};

struct MpCheckpointRow {
    double t = 0.0;
    double mean_m = 0.0;
    double z_mean = 0.0;
    double var_m = 0.0;
    double mean_bracket = 0.0;
    double z_var = 0.0;
    bool pass = false;
};

struct MpCheckReport {
    std::vector<MpCheckpointRow> rows;
    bool pass = false;
    long clip_events = 0;
};

MpCheckReport mp_martingale_check(const MpCheckConfig& cfg);

/// Distribution-equality proxy for uniqueness in law: the empirical law of
/// <X_T, phi> from two independent ensembles at the same dt must agree by a
/// two-sample KS test (p >= min_p), and halving dt must move the law by at
/// most the documented scheme-bias allowance on the KS distance.
struct UniquenessProxyConfig {
    DualityConfig base;           // replicas = per-ensemble count
    double min_p = 0.01;
    double refinement_allowance = 0.05;  // max KS distance between dt and dt/2 laws
};

struct UniquenessProxyReport {
    double d_same_dt = 0.0;
    double p_same_dt = 0.0;
    double d_refined = 0.0;
    double allowance = 0.0;
    bool pass_same_dt = false;
    bool pass_refined = false;
    bool pass = false;
};

UniquenessProxyReport uniqueness_proxy_check(const UniquenessProxyConfig& cfg);

/// Per-replica samples of <X_T, phi> (building block shared by the proxy
/// check and tests).
std::vector<double> x_pairing_samples(const DualityConfig& cfg, std::uint64_t stream_block);

}  // namespace sbm
