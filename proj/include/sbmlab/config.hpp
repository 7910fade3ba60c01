#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sbmlab/initial_data.hpp"
#include "sbmlab/spde.hpp"

namespace sbm {

// Experiment configuration text: flat INI-style sections of key = value
// lines, '#' comments. Sections and keys:
//
//   [grid]            L, N
//   [scheme]          lambda (target, <= 1), clip (on | off |
//                     full-truncation; see NegativityPolicy)
//   [model]           kind (sbm | pam | heat, optional; inferred from run
//                     kind), rho (sbm only)
//   [initial]         u1, u2 (two-population kinds) | v0 (dual kinds) | f
//                     (heat suite)
//   [test_functions]  phi, psi, g (as the experiment kind requires)
//   [run]             kind, T, checkpoints (count), replicas, base_seed,
//   [thresholds]      z_max, epsilon_frac, final_fraction_max,
//                     median_final_tol, sqrt_mass_decay_factor,
//                     l1_tolerance, flat_tolerance, ks_min_p,
//                     ks_refinement_allowance
//   [output]          dump_fields (on/off), plot (on/off)
//   [fault]           noise_scale, drift_scale, rho (deliberate scheme
//                     corruption for power checks)
//
// Descriptor values are sums of terms joined by '+':
//   constant <c>
//   gaussian_bump {mass=<m> | amplitude=<a>} [center=<c>] [width=<w>]
//   smooth_cutoff_bump amplitude=<a> n=<r>
//   sine amplitude=<a> k=<wavenumber>
//   table <v0> <v1> ... (length must equal N)
//   zero

enum class ExperimentKind {
    Duality,
    SelfDuality,
    MpCheck,
    HeatSuite,
    PamDecay,
    GlobalExtinction,
    LocalExtinction,
    UniquenessProxy,
};

const char* kind_name(ExperimentKind k);
std::optional<ExperimentKind> kind_from_name(const std::string& name);
std::vector<std::string> all_kind_names();

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Duality;

    double half_width = 5.0;
    int points = 64;

    double lambda = 0.5;  // target; the realized dt rounds down so checkpoints land on steps
    NegativityPolicy clip = NegativityPolicy::ClipState;

    double rho = 1.0;

    InitialData u1, u2, v0, f;
    InitialData phi, psi, g;

    double horizon = 0.0;
    int checkpoints = 10;
    long replicas = 0;  // 0 = kind default
    std::uint64_t base_seed = 1;
    int workers = 1;

    double z_max = 4.0;
    double epsilon_frac = 0.1;
    double final_fraction_max = 0.3;
    double median_final_tol = 0.35;
    double sqrt_mass_decay_factor = 2.0;
    double l1_tolerance = 0.05;
    double flat_tolerance = 1e-4;
    double ks_min_p = 0.01;
    double ks_refinement_allowance = 0.05;

    bool dump_fields = false;
    bool plot = false;

    double fault_noise_scale = 1.0;
    double fault_drift_scale = 1.0;
    std::optional<double> fault_rho;

    /// Normalized serialization of every effective field; its FNV-1a hash is
    /// the config fingerprint carried by every CSV row.
    std::string canonical_text() const;
    std::string hash() const;

    long effective_replicas() const;
};

struct ParseError {
    int line = 0;  // 0 when the error is not tied to a specific line
    std::string message;
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<ParseError> errors;

    bool ok() const { return config.has_value() && errors.empty(); }
};

ParseResult parse_config(const std::string& text);

/// Descriptor grammar used by the [initial] / [test_functions] values.
/// Throws std::invalid_argument with a message on malformed input.
InitialData parse_descriptor(const std::string& text);

}  // namespace sbm
