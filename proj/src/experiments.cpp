#include "sbmlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "sbmlab/parallel.hpp"

namespace sbm {

bool LongtimeReport::pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const ObservableSeries* LongtimeReport::find(const std::string& name) const {
    for (const auto& s : series)
        if (s.name == name) return &s;
    return nullptr;
}

void LongtimeConfig::validate() const {
    if (n_steps < 1) throw std::invalid_argument("longtime: n_steps must be >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("longtime: horizon must be positive");
    const double step = horizon / n_steps;
    if (std::fabs(scheme.dt - step) > 1e-12 * std::max(1.0, step))
        throw std::invalid_argument("longtime: scheme.dt must equal horizon / n_steps");
    scheme.validate(grid);
    if (replicas < 2) throw std::invalid_argument("longtime: at least 2 replicas required");
    int prev = -1;
    for (int c : checkpoint_steps) {
        if (c < 0 || c > n_steps) throw std::invalid_argument("longtime: checkpoint outside step range");
        if (c <= prev) throw std::invalid_argument("longtime: checkpoints must be strictly increasing");
        prev = c;
    }
    if (checkpoint_steps.empty()) throw std::invalid_argument("longtime: no checkpoints");
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

CheckpointStats column_stats(double t, const std::vector<double>& samples, double eps) {
    CheckpointStats cs;
    cs.t = t;
    const MCEstimate est = estimate_from_samples(samples);
    cs.mean = est.mean;
    cs.stderr_mean = est.stderr_mean;
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const size_t lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, sorted.size() - 1);
        const double f = pos - static_cast<double>(lo);
        return sorted[lo] * (1.0 - f) + sorted[hi] * f;
    };
    cs.median = at(0.5);
    cs.q10 = at(0.1);
    cs.q90 = at(0.9);
    cs.frac_above = fraction_above(samples, eps);
    return cs;
}

ObservableSeries build_series(const std::string& name, const std::vector<double>& times,
                              const std::vector<std::vector<double>>& columns, double eps) {
    ObservableSeries s;
    s.name = name;
    s.epsilon = eps;
    for (size_t k = 0; k < columns.size(); ++k) s.rows.push_back(column_stats(times[k], columns[k], eps));
    return s;
}

// stderr of the sample median (asymptotic normal approximation, 1.2533 sd/sqrt(n)).
double median_stderr(const CheckpointStats& cs, long) { return 1.2533 * cs.stderr_mean; }

double fraction_stderr(double p, long n) {
    const double nn = static_cast<double>(n);
    return std::sqrt(std::max(p * (1.0 - p), 1.0 / nn) / nn);
}

Verdict verdict_median_nonincreasing(const std::string& name, const ObservableSeries& s, long n) {
    Verdict v{name + ": median non-increasing", true, ""};
    for (size_t k = 0; k + 1 < s.rows.size(); ++k) {
        const double slack = std::sqrt(std::pow(median_stderr(s.rows[k], n), 2) +
                                       std::pow(median_stderr(s.rows[k + 1], n), 2));
        if (s.rows[k + 1].median > s.rows[k].median + slack) {
            v.pass = false;
            v.detail = "rises at t=" + fmt(s.rows[k + 1].t);
            return v;
        }
    }
    return v;
}

Verdict verdict_fraction_nonincreasing(const std::string& name, const ObservableSeries& s, long n) {
    Verdict v{name + ": fraction-above-eps non-increasing", true, ""};
    for (size_t k = 0; k + 1 < s.rows.size(); ++k) {
        const double slack = std::sqrt(std::pow(fraction_stderr(s.rows[k].frac_above, n), 2) +
                                       std::pow(fraction_stderr(s.rows[k + 1].frac_above, n), 2));
        if (s.rows[k + 1].frac_above > s.rows[k].frac_above + slack) {
            v.pass = false;
            v.detail = "rises at t=" + fmt(s.rows[k + 1].t);
            return v;
        }
    }
    return v;
}

Verdict verdict_mass_martingale(const std::string& name, const ObservableSeries& s, double initial,
                                double z_max) {
    Verdict v{name + ": mean flat (martingale)", true, ""};
    for (const auto& row : s.rows) {
        const double dev = std::fabs(row.mean - initial);
        const double allowed = z_max * row.stderr_mean + 1e-12 * std::max(1.0, std::fabs(initial));
        if (dev > allowed) {
            v.pass = false;
            v.detail = "off by " + fmt(dev) + " (" + fmt(row.stderr_mean) + " stderr) at t=" + fmt(row.t);
            return v;
        }
    }
    return v;
}

struct SbmEnsembleResult {
    std::vector<double> times;
    // matrices[obs][checkpoint][replica]
    std::vector<std::vector<std::vector<double>>> matrices;
    long clip_events = 0;
    double min_x_minus_abs_y = 0.0;
};

// Records n_obs scalars per checkpoint per replica; recorder fills slots.
SbmEnsembleResult run_sbm_ensemble(
    const LongtimeConfig& cfg, const GridFunction& u1_0, const GridFunction& u2_0, int n_obs,
    const std::function<void(const SbmState&, double*)>& recorder) {
    SbmEnsembleResult out;
    const size_t n_cp = cfg.checkpoint_steps.size();
    const size_t reps = static_cast<size_t>(cfg.replicas);
    out.matrices.assign(static_cast<size_t>(n_obs),
                        std::vector<std::vector<double>>(n_cp, std::vector<double>(reps, 0.0)));
    out.times.resize(n_cp);
    const double dt = cfg.dt();
    for (size_t k = 0; k < n_cp; ++k) out.times[k] = cfg.checkpoint_steps[k] * dt;

    std::atomic<long> clips{0};
    std::vector<double> replica_min(reps, DBL_MAX);
    const bool truncated = cfg.scheme.policy() == NegativityPolicy::FullTruncation;

    parallel_for_replicas(cfg.replicas, cfg.workers, [&](int i) {
        SbmState s{u1_0, u2_0, 0.0, 1.0};
        NoiseGenerator gen(SeedSpec{cfg.base_seed, cfg.stream_block + static_cast<std::uint64_t>(i)});
        StepStats stats;
        std::vector<double> slots(static_cast<size_t>(n_obs));
        SbmState view = s;  // reported fields: positive parts under full truncation
        size_t next_cp = 0;
        double path_min = DBL_MAX;
        auto record = [&](int step, const SbmState& state) {
            if (next_cp < cfg.checkpoint_steps.size() && cfg.checkpoint_steps[next_cp] == step) {
                const SbmState* reported = &state;
                if (truncated) {
                    view.t = state.t;
                    for (int j = 0; j < state.u1.size(); ++j) {
                        view.u1[j] = std::max(state.u1[j], 0.0);
                        view.u2[j] = std::max(state.u2[j], 0.0);
                    }
                    reported = &view;
                }
                recorder(*reported, slots.data());
                for (int o = 0; o < n_obs; ++o)
                    out.matrices[static_cast<size_t>(o)][next_cp][static_cast<size_t>(i)] =
                        slots[static_cast<size_t>(o)];
                for (int j = 0; j < reported->u1.size(); ++j) {
                    const double x = reported->u1[j] + reported->u2[j];
                    const double y = reported->u1[j] - reported->u2[j];
                    path_min = std::min(path_min, x - std::fabs(y));
                }
                ++next_cp;
            }
        };
        record(0, s);
        run_sbm(s, cfg.scheme, gen, cfg.n_steps, stats, record);
        replica_min[static_cast<size_t>(i)] = path_min;
        clips += stats.clip_events;
    });

    out.clip_events = clips.load();
    out.min_x_minus_abs_y = *std::min_element(replica_min.begin(), replica_min.end());
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Deterministic heat suite
// ---------------------------------------------------------------------------

LongtimeReport heat_longtime_suite(const HeatSuiteConfig& cfg) {
    if (!(cfg.lambda > 0.0 && cfg.lambda <= 1.0))
        throw std::invalid_argument("heat_suite: stability bound lambda <= 1 violated");
    if (cfg.checkpoints < 2) throw std::invalid_argument("heat_suite: need at least 2 checkpoints");

    const GridSpec& grid = cfg.grid;
    const double dt = cfg.lambda * grid.dx * grid.dx;
    const int per_segment = std::max(1, static_cast<int>(std::ceil(cfg.horizon / (dt * cfg.checkpoints))));
    const int n_steps = per_segment * cfg.checkpoints;
    const double horizon = n_steps * dt;
    if (std::sqrt(horizon) > grid.half_width / 4.0)
        throw std::invalid_argument("heat_suite: torus-horizon rule sqrt(T) <= L/4 violated");

    const GridFunction f = sample(grid, cfg.data);
    const double mass0 = total_mass(f);
    const double fbar = mean_bar(f);
    const double sup0 = f.sup_norm();

    // Single sine mode (plus constants): rate check against the stencil eigenvalue.
    const SineTerm* sine = nullptr;
    bool single_sine = true;
    for (const auto& term : cfg.data.terms) {
        if (const auto* st = std::get_if<SineTerm>(&term)) {
            if (sine) single_sine = false;
            sine = st;
        } else if (!std::holds_alternative<ConstantTerm>(term)) {
            single_sine = false;
        }
    }
    const bool check_sine = sine != nullptr && single_sine;
    GridFunction sine_unit(grid, 0.0);
    double sine_norm = 0.0;
    double mu = 0.0;
    if (check_sine) {
        sine_unit = sample(grid, sine_data(1.0, sine->wavenumber));
        sine_norm = pair(sine_unit, sine_unit);
        const double kappa = sine->wavenumber * M_PI / grid.half_width;
        mu = 1.0 - cfg.lambda * (1.0 - std::cos(kappa * grid.dx));
    }

    const bool signed_data = f.min_value() < 0.0 && mass0 >= 0.0;
    const bool kernel_check = cfg.kernel_comparison && cfg.data.integrable_like();

    LongtimeReport rep;
    std::vector<double> mass_series, neg_series, l1_series, sup_series, flat_series, sine_ratio_err;

    std::vector<double> cur = f.values;
    std::vector<double> next(cur.size());
    bool max_principle_ok = true;
    double running_min = f.min_value();
    double running_max = f.max_value();
    const double mp_tol = 4.0 * DBL_EPSILON * std::max({1.0, std::fabs(running_min), std::fabs(running_max)});

    auto record = [&](int step) {
        const double t = step * dt;
        GridFunction u(grid, cur);
        rep.times.push_back(t);
        mass_series.push_back(total_mass(u));
        sup_series.push_back(u.sup_norm());
        if (signed_data) neg_series.push_back(total_mass(negative_part(u)));
        if (kernel_check && step > 0) {
            GridFunction kernel(grid, 0.0);
            for (int j = 0; j < grid.points; ++j) kernel[j] = mass0 * heat_kernel(t, grid.x(j));
            l1_series.push_back(l1_distance(u, kernel));
        }
        double flat_dev = 0.0;
        for (double v : cur) flat_dev = std::max(flat_dev, std::fabs(v - fbar));
        flat_series.push_back(flat_dev);
        if (check_sine && step > 0) {
            const double coeff = pair(u, sine_unit) / sine_norm;
            const double predicted = sine->amplitude * std::pow(mu, step);
            if (std::fabs(predicted) > 1e-8 * std::fabs(sine->amplitude))
                sine_ratio_err.push_back(std::fabs(coeff / predicted - 1.0));
        }
    };

    record(0);
    for (int k = 1; k <= n_steps; ++k) {
        heat_step_into(cur, next, cfg.lambda);
        cur.swap(next);
        double mn = cur[0], mx = cur[0];
        for (double v : cur) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        if (mn < running_min - mp_tol || mx > running_max + mp_tol) max_principle_ok = false;
        running_min = mn;
        running_max = mx;
        if (k % per_segment == 0) record(k);
    }

    auto push_series = [&](const std::string& name, const std::vector<double>& vals, size_t offset) {
        ObservableSeries s;
        s.name = name;
        for (size_t k = 0; k < vals.size(); ++k) {
            CheckpointStats cs;
            cs.t = rep.times[k + offset];
            cs.mean = vals[k];
            cs.median = vals[k];
            s.rows.push_back(cs);
        }
        rep.series.push_back(std::move(s));
    };
    push_series("mass", mass_series, 0);
    push_series("sup_norm", sup_series, 0);
    push_series("sup_dev_from_mean", flat_series, 0);
    if (signed_data) push_series("negative_part_mass", neg_series, 0);
    if (kernel_check) push_series("l1_dist_to_mass_kernel", l1_series, 1);

    // Verdicts.
    {
        Verdict v{"mass conserved to 1e-12 relative", true, ""};
        for (double m : mass_series)
            if (std::fabs(m - mass0) > 1e-12 * std::max(1.0, std::fabs(mass0))) {
                v.pass = false;
                v.detail = "drift " + fmt(m - mass0);
            }
        rep.verdicts.push_back(v);
    }
    rep.verdicts.push_back({"discrete maximum principle", max_principle_ok, ""});
    {
        Verdict v{"sup norm bounded by initial sup norm", true, ""};
        for (double s : sup_series)
            if (s > sup0 + 1e-12) v.pass = false;
        rep.verdicts.push_back(v);
    }
    if (signed_data) {
        Verdict v{"negative-part mass strictly decreasing", true, ""};
        for (size_t k = 0; k + 1 < neg_series.size(); ++k)
            if (!(neg_series[k + 1] < neg_series[k])) {
                v.pass = false;
                v.detail = "at t=" + fmt(rep.times[k + 1]);
            }
        rep.verdicts.push_back(v);
    }
    if (kernel_check) {
        Verdict v{"L1 distance to mass*kernel strictly decreasing", true, ""};
        for (size_t k = 0; k + 1 < l1_series.size(); ++k)
            if (!(l1_series[k + 1] < l1_series[k])) {
                v.pass = false;
                v.detail = "at t=" + fmt(rep.times[k + 2]);
            }
        rep.verdicts.push_back(v);
        rep.verdicts.push_back({"L1 distance below tolerance at horizon",
                                !l1_series.empty() && l1_series.back() <= cfg.l1_tolerance,
                                "final " + fmt(l1_series.empty() ? 0.0 : l1_series.back())});
    }
    if (!cfg.data.integrable_like()) {
        rep.verdicts.push_back({"sup deviation from mean below tolerance at horizon",
                                flat_series.back() <= cfg.flat_tolerance,
                                "final " + fmt(flat_series.back())});
    }
    if (check_sine) {
        double worst = 0.0;
        for (double e : sine_ratio_err) worst = std::max(worst, e);
        rep.verdicts.push_back({"sine mode decays at the stencil eigenvalue rate (1e-6 relative)",
                                !sine_ratio_err.empty() && worst <= 1e-6, "worst " + fmt(worst)});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Dual-field (linear multiplicative noise) decay
// ---------------------------------------------------------------------------

LongtimeReport pam_decay_experiment(const InitialData& v0_data, const InitialData& g_data,
                                    const LongtimeConfig& cfg) {
    cfg.validate();
    const GridFunction v0 = sample(cfg.grid, v0_data);
    const GridFunction g = sample(cfg.grid, g_data);
    if (v0.min_value() < 0.0) throw std::invalid_argument("pam_decay: V0 must be nonnegative");
    if (g.min_value() < 0.0) throw std::invalid_argument("pam_decay: g must be nonnegative");

    const double vg0 = pair(v0, g);
    const double mass0 = total_mass(v0);
    const double eps = cfg.epsilon_frac * vg0;

    const size_t n_cp = cfg.checkpoint_steps.size();
    const size_t reps = static_cast<size_t>(cfg.replicas);
    std::vector<std::vector<double>> vg(n_cp, std::vector<double>(reps, 0.0));
    std::vector<std::vector<double>> mass(n_cp, std::vector<double>(reps, 0.0));
    std::vector<std::vector<double>> sqrt_mass(n_cp, std::vector<double>(reps, 0.0));
    std::atomic<long> clips{0};

    const bool truncated = cfg.scheme.policy() == NegativityPolicy::FullTruncation;
    parallel_for_replicas(cfg.replicas, cfg.workers, [&](int i) {
        PamState s{v0, 0.0};
        NoiseGenerator gen(SeedSpec{cfg.base_seed, cfg.stream_block + static_cast<std::uint64_t>(i)});
        StepStats stats;
        GridFunction view = s.v;
        size_t next_cp = 0;
        auto record = [&](int step, const PamState& state) {
            if (next_cp < cfg.checkpoint_steps.size() && cfg.checkpoint_steps[next_cp] == step) {
                const GridFunction* reported = &state.v;
                if (truncated) {
                    for (int j = 0; j < state.v.size(); ++j) view[j] = std::max(state.v[j], 0.0);
                    reported = &view;
                }
                const double m = total_mass(*reported);
                vg[next_cp][static_cast<size_t>(i)] = pair(*reported, g);
                mass[next_cp][static_cast<size_t>(i)] = m;
                sqrt_mass[next_cp][static_cast<size_t>(i)] = std::sqrt(std::max(m, 0.0));
                ++next_cp;
            }
        };
        record(0, s);
        run_pam(s, cfg.scheme, gen, cfg.n_steps, stats, record);
        clips += stats.clip_events;
    });

    LongtimeReport rep;
    rep.clip_events = clips.load();
    const double dt = cfg.dt();
    for (int c : cfg.checkpoint_steps) rep.times.push_back(c * dt);
    rep.series.push_back(build_series("pair_v_g", rep.times, vg, eps));
    rep.series.push_back(build_series("mass_v", rep.times, mass, 0.0));
    rep.series.push_back(build_series("sqrt_mass_v", rep.times, sqrt_mass, 0.0));

    const ObservableSeries& s_vg = rep.series[0];
    const ObservableSeries& s_mass = rep.series[1];
    const ObservableSeries& s_sqrt = rep.series[2];

    rep.verdicts.push_back(verdict_median_nonincreasing("pair_v_g", s_vg, cfg.replicas));
    rep.verdicts.push_back(verdict_fraction_nonincreasing("pair_v_g", s_vg, cfg.replicas));
    rep.verdicts.push_back({"pair_v_g: final fraction above eps below target",
                            s_vg.rows.back().frac_above <= cfg.final_fraction_max,
                            "final " + fmt(s_vg.rows.back().frac_above)});
    rep.verdicts.push_back(verdict_mass_martingale("mass_v", s_mass, mass0, cfg.z_max));
    {
        Verdict v{"sqrt mass mean non-increasing", true, ""};
        for (size_t k = 0; k + 1 < s_sqrt.rows.size(); ++k) {
            const double slack = std::sqrt(std::pow(s_sqrt.rows[k].stderr_mean, 2) +
                                           std::pow(s_sqrt.rows[k + 1].stderr_mean, 2));
            if (s_sqrt.rows[k + 1].mean > s_sqrt.rows[k].mean + slack) {
                v.pass = false;
                v.detail = "rises at t=" + fmt(s_sqrt.rows[k + 1].t);
            }
        }
        rep.verdicts.push_back(v);
    }
    rep.verdicts.push_back(
        {"sqrt mass mean decays by configured factor",
         s_sqrt.rows.back().mean <= s_sqrt.rows.front().mean / cfg.sqrt_mass_decay_factor,
         "from " + fmt(s_sqrt.rows.front().mean) + " to " + fmt(s_sqrt.rows.back().mean)});
    return rep;
}

// ---------------------------------------------------------------------------
// Extinction experiments
// ---------------------------------------------------------------------------

LongtimeReport global_extinction_experiment(const InitialData& phi_data, const InitialData& psi_data,
                                            const LongtimeConfig& cfg) {
    cfg.validate();
    if (!phi_data.integrable_like() || !psi_data.integrable_like())
        throw std::invalid_argument(
            "global_extinction: initial data must be integrable-type descriptors");

    GridFunction phi = sample(cfg.grid, phi_data);
    GridFunction psi = sample(cfg.grid, psi_data);
    if (phi.min_value() < 0.0 || psi.min_value() < 0.0)
        throw std::invalid_argument("global_extinction: initial data must be nonnegative");
    // Without loss of generality the first population carries the larger mass.
    if (total_mass(phi) < total_mass(psi)) std::swap(phi, psi);
    const double mass_phi = total_mass(phi);
    const double mass_psi = total_mass(psi);

    const auto ens = run_sbm_ensemble(cfg, phi, psi, 3, [](const SbmState& s, double* slots) {
        const double m1 = total_mass(s.u1);
        const double m2 = total_mass(s.u2);
        slots[0] = m1;
        slots[1] = m2;
        slots[2] = m1 * m2;
    });

    LongtimeReport rep;
    rep.clip_events = ens.clip_events;
    rep.times = ens.times;
    rep.series.push_back(build_series("mass_u1", rep.times, ens.matrices[0], 0.0));
    rep.series.push_back(
        build_series("mass_u2", rep.times, ens.matrices[1], cfg.epsilon_frac * mass_psi));
    rep.series.push_back(build_series("mass_product", rep.times, ens.matrices[2], 0.0));

    const ObservableSeries& s1 = rep.series[0];
    const ObservableSeries& s2 = rep.series[1];

    rep.verdicts.push_back(verdict_median_nonincreasing("mass_u2", s2, cfg.replicas));
    rep.verdicts.push_back({"mass_u2: median below 0.2 * initial at horizon",
                            s2.rows.back().median <= 0.2 * mass_psi + 1e-12,
                            "final " + fmt(s2.rows.back().median)});
    rep.verdicts.push_back({"mass_u1: median near initial mass difference at horizon",
                            std::fabs(s1.rows.back().median - (mass_phi - mass_psi)) <= cfg.median_final_tol,
                            "final " + fmt(s1.rows.back().median) + " target " + fmt(mass_phi - mass_psi)});
    rep.verdicts.push_back(verdict_mass_martingale("mass_u1", s1, mass_phi, cfg.z_max));
    rep.verdicts.push_back(verdict_mass_martingale("mass_u2", s2, mass_psi, cfg.z_max));
    rep.verdicts.push_back({"X >= |Y| at every checkpoint", ens.min_x_minus_abs_y >= -1e-12,
                            "min " + fmt(ens.min_x_minus_abs_y)});
    return rep;
}

LongtimeReport local_extinction_experiment(const InitialData& phi_data, const InitialData& psi_data,
                                           const InitialData& g_data, const LongtimeConfig& cfg) {
    cfg.validate();
    if (!g_data.integrable_like())
        throw std::invalid_argument("local_extinction: g must be an integrable-type descriptor");

    GridFunction phi = sample(cfg.grid, phi_data);
    GridFunction psi = sample(cfg.grid, psi_data);
    const GridFunction g = sample(cfg.grid, g_data);
    if (phi.min_value() < 0.0 || psi.min_value() < 0.0 || g.min_value() < 0.0)
        throw std::invalid_argument("local_extinction: data must be nonnegative");
    if (mean_bar(phi) < mean_bar(psi)) std::swap(phi, psi);
    const double target = (mean_bar(phi) - mean_bar(psi)) * total_mass(g);
    const double eps = cfg.epsilon_frac * pair(psi, g);

    const auto ens = run_sbm_ensemble(cfg, phi, psi, 4, [&](const SbmState& s, double* slots) {
        slots[0] = pair(s.u1, g);
        slots[1] = pair(s.u2, g);
        slots[2] = total_mass(s.u1);
        slots[3] = total_mass(s.u2);
    });

    LongtimeReport rep;
    rep.clip_events = ens.clip_events;
    rep.times = ens.times;
    rep.series.push_back(build_series("pair_u1_g", rep.times, ens.matrices[0], 0.0));
    rep.series.push_back(build_series("pair_u2_g", rep.times, ens.matrices[1], eps));
    rep.series.push_back(build_series("mass_u1", rep.times, ens.matrices[2], 0.0));
    rep.series.push_back(build_series("mass_u2", rep.times, ens.matrices[3], 0.0));

    const ObservableSeries& s1 = rep.series[0];
    const ObservableSeries& s2 = rep.series[1];

    rep.verdicts.push_back(verdict_fraction_nonincreasing("pair_u2_g", s2, cfg.replicas));
    rep.verdicts.push_back({"pair_u2_g: final fraction above eps below target",
                            s2.rows.back().frac_above <= cfg.final_fraction_max,
                            "final " + fmt(s2.rows.back().frac_above)});
    rep.verdicts.push_back({"pair_u1_g: median near (mean difference) * <g,1> at horizon",
                            std::fabs(s1.rows.back().median - target) <= cfg.median_final_tol,
                            "final " + fmt(s1.rows.back().median) + " target " + fmt(target)});
    rep.verdicts.push_back(
        verdict_mass_martingale("mass_u1", rep.series[2], total_mass(phi), cfg.z_max));
    rep.verdicts.push_back(
        verdict_mass_martingale("mass_u2", rep.series[3], total_mass(psi), cfg.z_max));
    rep.verdicts.push_back({"X >= |Y| at every checkpoint", ens.min_x_minus_abs_y >= -1e-12,
                            "min " + fmt(ens.min_x_minus_abs_y)});
    return rep;
}

}  // namespace sbm
