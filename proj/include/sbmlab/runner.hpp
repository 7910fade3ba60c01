#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbmlab/config.hpp"
#include "sbmlab/grid.hpp"

namespace sbm {

/// Command-line overrides applied on top of a parsed config.
struct RunOptions {
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed_override;
    std::optional<long> replicas_override;
    std::optional<int> workers_override;
    bool deterministic = false;  // recorded; reductions are deterministic either way
    bool plot = false;
    std::map<std::string, double> faults;  // noise-scale / drift-scale / wrong-rho
};

/// Exit-code contract: 0 = all verdicts pass, 1 = a statistical verdict
/// failed, 2 = usage or configuration error.
constexpr int kExitPass = 0;
constexpr int kExitVerdictFailed = 1;
constexpr int kExitUsage = 2;

int run_experiment(ExperimentConfig cfg, const RunOptions& opts);

std::vector<std::string> list_experiments();

/// One-line statement of what the named experiment verifies.
/// Throws std::invalid_argument on an unknown kind.
std::string describe_experiment(const std::string& kind);

/// Derived solver time grid: dt rounds the target lambda down so that the
/// horizon is an exact multiple of dt and every checkpoint lands on a step.
struct TimeGrid {
    double dt = 0.0;
    int n_steps = 0;
    double lambda_actual = 0.0;
    std::vector<int> checkpoint_steps;
};

TimeGrid resolve_time_grid(const GridSpec& grid, double lambda_target, double horizon,
                           int checkpoints, bool include_zero);

/// Renders per-observable SVG line charts from a tidy longtime report CSV.
/// Returns the written file paths. Throws on malformed CSV.
std::vector<std::filesystem::path> plot_report_csv(const std::filesystem::path& csv,
                                                   const std::filesystem::path& out_dir);

}  // namespace sbm
