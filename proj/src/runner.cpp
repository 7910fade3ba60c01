#include "sbmlab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sbmlab/duality.hpp"
#include "sbmlab/experiments.hpp"
#include "sbmlab/fieldio.hpp"
#include "sbmlab/noise.hpp"
#include "sbmlab/spde.hpp"
#include "sbmlab/svg.hpp"

namespace sbm {

namespace {

// Shortest-exact decimal for doubles keeps CSVs byte-stable across reruns.
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_header_comment(const ExperimentConfig& cfg) {
    return "# sbmlab-csv schema=1 generator=" + std::string(generator_version()) +
           " config_hash=" + cfg.hash() + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct Resolved {
    GridSpec grid;
    SchemeParams scheme;
    TimeGrid time;
};

Resolved resolve(const ExperimentConfig& cfg, bool include_zero_checkpoint) {
    Resolved r;
    r.grid = make_grid(cfg.half_width, cfg.points);
    r.time = resolve_time_grid(r.grid, cfg.lambda, cfg.horizon, cfg.checkpoints, include_zero_checkpoint);
    r.scheme.dt = r.time.dt;
    r.scheme.clip_negative = cfg.clip != NegativityPolicy::Off;
    r.scheme.negativity =
        cfg.clip == NegativityPolicy::FullTruncation ? NegativityPolicy::FullTruncation
                                                     : NegativityPolicy::ClipState;
    r.scheme.noise_scale = cfg.fault_noise_scale;
    r.scheme.drift_scale = cfg.fault_drift_scale;
    r.scheme.rho_override = cfg.fault_rho;
    return r;
}

LongtimeConfig longtime_config(const ExperimentConfig& cfg, const Resolved& r) {
    LongtimeConfig lt;
    lt.grid = r.grid;
    lt.scheme = r.scheme;
    lt.horizon = cfg.horizon;
    lt.n_steps = r.time.n_steps;
    lt.checkpoint_steps = r.time.checkpoint_steps;
    lt.replicas = static_cast<int>(cfg.effective_replicas());
    lt.base_seed = cfg.base_seed;
    lt.workers = cfg.workers;
    lt.z_max = cfg.z_max;
    lt.epsilon_frac = cfg.epsilon_frac;
    lt.final_fraction_max = cfg.final_fraction_max;
    lt.sqrt_mass_decay_factor = cfg.sqrt_mass_decay_factor;
    lt.median_final_tol = cfg.median_final_tol;
    return lt;
}

DualityConfig duality_config(const ExperimentConfig& cfg, const Resolved& r) {
    DualityConfig dc;
    dc.grid = r.grid;
    dc.u1_0 = sample(r.grid, cfg.u1);
    dc.u2_0 = cfg.u2.empty() ? constant(r.grid, 0.0) : sample(r.grid, cfg.u2);
    dc.phi = sample(r.grid, cfg.phi);
    dc.horizon = cfg.horizon;
    dc.n_steps = r.time.n_steps;
    dc.scheme = r.scheme;
    dc.base_seed = cfg.base_seed;
    dc.replicas = static_cast<int>(cfg.effective_replicas());
    dc.workers = cfg.workers;
    dc.z_max = cfg.z_max;
    return dc;
}

std::string duality_report_csv(const ExperimentConfig& cfg, const DualityReport& rep,
                               double dt, int n_steps) {
    std::ostringstream os;
    os << csv_header_comment(cfg)
       << "config_hash,kind,n,lhs_mean,lhs_stderr,rhs_mean,rhs_stderr,z,pass,base_seed,lambda,dt,"
          "n_steps,clip_events_lhs,clip_events_rhs,generator\n";
    os << cfg.hash() << ',' << kind_name(cfg.kind) << ',' << rep.lhs.n << ',' << num(rep.lhs.mean)
       << ',' << num(rep.lhs.stderr_mean) << ',' << num(rep.rhs.mean) << ','
       << num(rep.rhs.stderr_mean) << ',' << num(rep.z) << ',' << (rep.pass ? 1 : 0) << ','
       << cfg.base_seed << ',' << num(cfg.lambda) << ',' << num(dt) << ',' << n_steps << ','
       << rep.clip_events_lhs << ',' << rep.clip_events_rhs << ',' << generator_version() << '\n';
    return os.str();
}

std::string longtime_report_csv(const ExperimentConfig& cfg, const LongtimeReport& rep) {
    std::ostringstream os;
    os << csv_header_comment(cfg) << "config_hash,t,observable,statistic,value\n";
    const std::string h = cfg.hash();
    for (const auto& s : rep.series) {
        for (const auto& row : s.rows) {
            auto emit = [&](const char* stat, double v) {
                os << h << ',' << num(row.t) << ',' << s.name << ',' << stat << ',' << num(v) << '\n';
            };
            emit("mean", row.mean);
            emit("stderr", row.stderr_mean);
            emit("median", row.median);
            emit("q10", row.q10);
            emit("q90", row.q90);
            emit("frac_above_eps", row.frac_above);
        }
    }
    return os.str();
}

std::string verdicts_csv(const ExperimentConfig& cfg, const LongtimeReport& rep) {
    std::ostringstream os;
    os << csv_header_comment(cfg) << "config_hash,criterion,pass,detail\n";
    const std::string h = cfg.hash();
    for (const auto& v : rep.verdicts) {
        std::string detail = v.detail;
        for (char& c : detail)
            if (c == ',') c = ';';
        os << h << ',' << v.criterion << ',' << (v.pass ? 1 : 0) << ',' << detail << '\n';
    }
    return os.str();
}

void write_longtime_plots(const ExperimentConfig& cfg, const LongtimeReport& rep,
                          const std::filesystem::path& dir) {
    for (const auto& s : rep.series) {
        SvgSeries mean_s{"mean", {}, {}}, med_s{"median", {}, {}}, q10_s{"q10", {}, {}},
            q90_s{"q90", {}, {}};
        for (const auto& row : s.rows) {
            mean_s.x.push_back(row.t);
            mean_s.y.push_back(row.mean);
            med_s.x.push_back(row.t);
            med_s.y.push_back(row.median);
            q10_s.x.push_back(row.t);
            q10_s.y.push_back(row.q10);
            q90_s.x.push_back(row.t);
            q90_s.y.push_back(row.q90);
        }
        const std::string svg = render_line_chart(
            std::string(kind_name(cfg.kind)) + ": " + s.name, "t", {mean_s, med_s, q10_s, q90_s});
        write_text(dir / ("plot_" + s.name + ".svg"), svg);
    }
}

void dump_checkpoint_fields(const ExperimentConfig& cfg, const Resolved& r,
                            const std::filesystem::path& dir) {
    // Replica 0 snapshots; enough to eyeball a path without exploding output.
    const auto cps = r.time.checkpoint_steps;
    if (cfg.kind == ExperimentKind::PamDecay) {
        PamState init{sample(r.grid, cfg.v0), 0.0};
        const Trajectory traj = simulate_pam(init, r.scheme, SeedSpec{cfg.base_seed, 0},
                                             r.time.n_steps, cps, {}, true);
        for (size_t k = 0; k < traj.fields.size(); ++k)
            write_field_dump(dir / ("field_v_cp" + std::to_string(k) + ".bin"),
                             traj.fields[k].second, traj.times[k]);
    } else {
        GridFunction a = sample(r.grid, cfg.kind == ExperimentKind::GlobalExtinction ||
                                                cfg.kind == ExperimentKind::LocalExtinction
                                            ? cfg.phi
                                            : cfg.u1);
        GridFunction b = cfg.kind == ExperimentKind::GlobalExtinction ||
                                 cfg.kind == ExperimentKind::LocalExtinction
                             ? sample(r.grid, cfg.psi)
                             : (cfg.u2.empty() ? constant(r.grid, 0.0) : sample(r.grid, cfg.u2));
        SbmState init{std::move(a), std::move(b), 0.0, cfg.rho};
        const Trajectory traj = simulate_sbm(init, r.scheme, SeedSpec{cfg.base_seed, 0},
                                             r.time.n_steps, cps, {}, true);
        for (size_t k = 0; k < traj.fields.size(); ++k) {
            const size_t cp = k / 2;
            write_field_dump(dir / ("field_" + std::string(k % 2 == 0 ? "u1" : "u2") + "_cp" +
                                    std::to_string(cp) + ".bin"),
                             traj.fields[k].second, traj.times[cp]);
        }
    }
}

}  // namespace

TimeGrid resolve_time_grid(const GridSpec& grid, double lambda_target, double horizon,
                           int checkpoints, bool include_zero) {
    if (!(lambda_target > 0.0) || lambda_target > 1.0)
        throw std::invalid_argument("resolve_time_grid: stability bound lambda <= 1 violated");
    if (checkpoints < 1) throw std::invalid_argument("resolve_time_grid: checkpoints must be >= 1");
    TimeGrid tg;
    if (horizon <= 0.0) {
        tg.checkpoint_steps = include_zero ? std::vector<int>{0} : std::vector<int>{};
        return tg;
    }
    const double dt_target = lambda_target * grid.dx * grid.dx;
    const int per_segment =
        std::max(1, static_cast<int>(std::ceil(horizon / (dt_target * checkpoints) - 1e-9)));
    tg.n_steps = per_segment * checkpoints;
    tg.dt = horizon / tg.n_steps;
    tg.lambda_actual = tg.dt / (grid.dx * grid.dx);
    if (include_zero) tg.checkpoint_steps.push_back(0);
    for (int k = 1; k <= checkpoints; ++k) tg.checkpoint_steps.push_back(k * per_segment);
    return tg;
}

std::vector<std::string> list_experiments() { return all_kind_names(); }

std::string describe_experiment(const std::string& kind) {
    const auto k = kind_from_name(kind);
    if (!k) throw std::invalid_argument("unknown experiment kind '" + kind + "'");
    switch (*k) {
        case ExperimentKind::Duality:
            return "duality: two-ensemble z test of E[exp(-<X_T,phi>)] against "
                   "E[exp(-<X_0,V_T> - 1/2 int_0^T <V_r^2, Y_{T-r}^2> dr)], coupling the rho=1 "
                   "two-population system to its linear dual field.";
        case ExperimentKind::SelfDuality:
            return "self-duality: E[exp(-<V'_T,psi>)] with V'_0=phi versus E[exp(-<phi,V_T>)] with "
                   "V_0=psi on independent ensembles; covers bounded non-integrable phi such as 1.";
        case ExperimentKind::MpCheck:
            return "mp-check: martingale structure of M_t = <S_{T-t}X_t,phi> - <S_T X_0,phi>: flat "
                   "mean and M_t^2 matching the bracket int_0^t <X_s^2 - Y_s^2, (S_{T-s}phi)^2> ds.";
        case ExperimentKind::HeatSuite:
            return "heat-suite: deterministic heat-flow longtime checks: mass conservation, "
                   "discrete maximum principle, L1 convergence to mass*kernel, negative-part mass "
                   "decay, sine-mode decay at the stencil eigenvalue rate, flattening to the mean.";
        case ExperimentKind::PamDecay:
            return "pam-decay: <V_t,g> -> 0 in probability (median and fraction-above-eps decay) "
                   "while <V_t,1> keeps a flat martingale mean and E[sqrt <V_t,1>] falls.";
        case ExperimentKind::GlobalExtinction:
            return "global-extinction: for integrable initial data the smaller population's total "
                   "mass dies out: median <U2_t,1> -> 0 and median <U1_t,1> -> <phi-psi,1>, while "
                   "both mean masses stay flat (martingale).";
        case ExperimentKind::LocalExtinction:
            return "local-extinction: for bounded initial data with means the locally smaller "
                   "population dies out: <U2_t,g> -> 0 in probability and median <U1_t,g> -> "
                   "(mean(phi)-mean(psi)) <g,1>.";
        case ExperimentKind::UniquenessProxy:
            return "uniqueness-proxy: distribution equality of <X_T,phi> across two independent "
                   "ensembles (two-sample KS) plus a dt-refinement agreement allowance.";
    }
    return "";
}

int run_experiment(ExperimentConfig cfg, const RunOptions& opts) {
    // CLI overrides become part of the effective config (and its hash).
    if (opts.seed_override) cfg.base_seed = *opts.seed_override;
    if (opts.replicas_override) cfg.replicas = *opts.replicas_override;
    if (opts.workers_override) cfg.workers = *opts.workers_override;
    if (opts.plot) cfg.plot = true;
    for (const auto& [name, factor] : opts.faults) {
        if (name == "noise-scale")
            cfg.fault_noise_scale = factor;
        else if (name == "drift-scale")
            cfg.fault_drift_scale = factor;
        else if (name == "wrong-rho")
            cfg.fault_rho = factor;
        else {
            std::fprintf(stderr, "unknown fault kind '%s'\n", name.c_str());
            return kExitUsage;
        }
    }

    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec || !std::filesystem::is_directory(opts.out_dir)) {
        std::fprintf(stderr, "output directory not writable: %s\n", opts.out_dir.string().c_str());
        return kExitUsage;
    }

    const auto t_start = std::chrono::steady_clock::now();
    bool pass = false;
    long clip_events = 0;
    nlohmann::json extra;

    try {
        const bool longtime_kind = cfg.kind == ExperimentKind::PamDecay ||
                                   cfg.kind == ExperimentKind::GlobalExtinction ||
                                   cfg.kind == ExperimentKind::LocalExtinction;
        const Resolved r = resolve(cfg, longtime_kind || cfg.kind == ExperimentKind::MpCheck);

        switch (cfg.kind) {
            case ExperimentKind::Duality: {
                const DualityReport rep = duality_check(duality_config(cfg, r));
                write_text(opts.out_dir / "report.csv",
                           duality_report_csv(cfg, rep, r.time.dt, r.time.n_steps));
                pass = rep.pass;
                clip_events = rep.clip_events_lhs + rep.clip_events_rhs;
                extra["z"] = rep.z;
                break;
            }
            case ExperimentKind::SelfDuality: {
                SelfDualityConfig sc;
                sc.grid = r.grid;
                sc.phi = sample(r.grid, cfg.phi);
                sc.psi = sample(r.grid, cfg.psi);
                sc.horizon = cfg.horizon;
                sc.n_steps = r.time.n_steps;
                sc.scheme = r.scheme;
                sc.base_seed = cfg.base_seed;
                sc.replicas = static_cast<int>(cfg.effective_replicas());
                sc.workers = cfg.workers;
                sc.z_max = cfg.z_max;
                const DualityReport rep = self_duality_check(sc);
                write_text(opts.out_dir / "report.csv",
                           duality_report_csv(cfg, rep, r.time.dt, r.time.n_steps));
                pass = rep.pass;
                clip_events = rep.clip_events_lhs + rep.clip_events_rhs;
                extra["z"] = rep.z;
                break;
            }
            case ExperimentKind::MpCheck: {
                MpCheckConfig mc;
                mc.base = duality_config(cfg, r);
                mc.checkpoint_steps = r.time.checkpoint_steps;
                const MpCheckReport rep = mp_martingale_check(mc);
                std::ostringstream os;
                os << csv_header_comment(cfg)
                   << "config_hash,t,mean_m,z_mean,var_m,mean_bracket,z_var,pass\n";
                for (const auto& row : rep.rows)
                    os << cfg.hash() << ',' << num(row.t) << ',' << num(row.mean_m) << ','
                       << num(row.z_mean) << ',' << num(row.var_m) << ',' << num(row.mean_bracket)
                       << ',' << num(row.z_var) << ',' << (row.pass ? 1 : 0) << '\n';
                write_text(opts.out_dir / "report.csv", os.str());
                pass = rep.pass;
                clip_events = rep.clip_events;
                break;
            }
            case ExperimentKind::UniquenessProxy: {
                UniquenessProxyConfig uc;
                uc.base = duality_config(cfg, r);
                uc.min_p = cfg.ks_min_p;
                uc.refinement_allowance = cfg.ks_refinement_allowance;
                const UniquenessProxyReport rep = uniqueness_proxy_check(uc);
                std::ostringstream os;
                os << csv_header_comment(cfg)
                   << "config_hash,d_same_dt,p_same_dt,d_refined,allowance,pass_same_dt,"
                      "pass_refined,pass\n"
                   << cfg.hash() << ',' << num(rep.d_same_dt) << ',' << num(rep.p_same_dt) << ','
                   << num(rep.d_refined) << ',' << num(rep.allowance) << ','
                   << (rep.pass_same_dt ? 1 : 0) << ',' << (rep.pass_refined ? 1 : 0) << ','
                   << (rep.pass ? 1 : 0) << '\n';
                write_text(opts.out_dir / "report.csv", os.str());
                pass = rep.pass;
                break;
            }
            case ExperimentKind::HeatSuite: {
                HeatSuiteConfig hc;
                hc.grid = r.grid;
                hc.data = cfg.f;
                hc.lambda = cfg.lambda;
                hc.horizon = cfg.horizon;
                hc.checkpoints = cfg.checkpoints;
                hc.l1_tolerance = cfg.l1_tolerance;
                hc.flat_tolerance = cfg.flat_tolerance;
                const LongtimeReport rep = heat_longtime_suite(hc);
                write_text(opts.out_dir / "report.csv", longtime_report_csv(cfg, rep));
                write_text(opts.out_dir / "verdicts.csv", verdicts_csv(cfg, rep));
                if (cfg.plot) write_longtime_plots(cfg, rep, opts.out_dir);
                pass = rep.pass();
                break;
            }
            case ExperimentKind::PamDecay:
            case ExperimentKind::GlobalExtinction:
            case ExperimentKind::LocalExtinction: {
                const LongtimeConfig lt = longtime_config(cfg, r);
                LongtimeReport rep;
                if (cfg.kind == ExperimentKind::PamDecay)
                    rep = pam_decay_experiment(cfg.v0, cfg.g, lt);
                else if (cfg.kind == ExperimentKind::GlobalExtinction)
                    rep = global_extinction_experiment(cfg.phi, cfg.psi, lt);
                else
                    rep = local_extinction_experiment(cfg.phi, cfg.psi, cfg.g, lt);
                write_text(opts.out_dir / "report.csv", longtime_report_csv(cfg, rep));
                write_text(opts.out_dir / "verdicts.csv", verdicts_csv(cfg, rep));
                if (cfg.plot) write_longtime_plots(cfg, rep, opts.out_dir);
                if (cfg.dump_fields) dump_checkpoint_fields(cfg, r, opts.out_dir);
                pass = rep.pass();
                clip_events = rep.clip_events;
                break;
            }
        }

        const double wall_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        nlohmann::json manifest;
        manifest["kind"] = kind_name(cfg.kind);
        manifest["config_hash"] = cfg.hash();
        manifest["config"] = cfg.canonical_text();
        manifest["generator"] = generator_version();
        manifest["code_version"] = "sbmlab 0.1.0";
        manifest["base_seed"] = cfg.base_seed;
        manifest["replicas"] = cfg.effective_replicas();
        manifest["workers"] = cfg.workers;
        manifest["deterministic"] = opts.deterministic;
        manifest["dt"] = r.time.dt;
        manifest["n_steps"] = r.time.n_steps;
        manifest["lambda_actual"] = r.time.lambda_actual;
        manifest["clip_events"] = clip_events;
        manifest["pass"] = pass;
        manifest["wall_time_s"] = wall_s;
        manifest["timestamp"] =
            static_cast<long>(std::chrono::duration_cast<std::chrono::seconds>(
                                  std::chrono::system_clock::now().time_since_epoch())
                                  .count());
        if (!extra.empty()) manifest["details"] = extra;
        write_text(opts.out_dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    return pass ? kExitPass : kExitVerdictFailed;
}

std::vector<std::filesystem::path> plot_report_csv(const std::filesystem::path& csv,
                                                   const std::filesystem::path& out_dir) {
    std::ifstream in(csv);
    if (!in) throw std::runtime_error("cannot open CSV: " + csv.string());
    std::string line;
    bool header_seen = false;
    // observable -> statistic -> (t, value)
    std::map<std::string, std::map<std::string, SvgSeries>> groups;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "config_hash,t,observable,statistic,value")
                throw std::runtime_error("not a longtime report CSV (header mismatch)");
            header_seen = true;
            continue;
        }
        std::istringstream ls(line);
        std::string hash, t_s, obs, stat, val_s;
        if (!std::getline(ls, hash, ',') || !std::getline(ls, t_s, ',') ||
            !std::getline(ls, obs, ',') || !std::getline(ls, stat, ',') ||
            !std::getline(ls, val_s))
            throw std::runtime_error("malformed CSV row at line " + std::to_string(line_no));
        auto& series = groups[obs][stat];
        series.label = stat;
        series.x.push_back(std::stod(t_s));
        series.y.push_back(std::stod(val_s));
    }
    if (!header_seen) throw std::runtime_error("empty CSV: " + csv.string());

    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (auto& [obs, stats] : groups) {
        std::vector<SvgSeries> series;
        for (const char* want : {"mean", "median", "q10", "q90", "frac_above_eps"}) {
            auto it = stats.find(want);
            if (it != stats.end()) series.push_back(it->second);
        }
        const auto path = out_dir / ("plot_" + obs + ".svg");
        write_text(path, render_line_chart(obs, "t", series));
        written.push_back(path);
    }
    return written;
}

}  // namespace sbm
