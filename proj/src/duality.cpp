#include "sbmlab/duality.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sbmlab/parallel.hpp"

namespace sbm {

namespace {

// dx * sum_j a_j^2 * bsq_j  (integrands of the time quadratures)
inline double pair_square(const std::vector<double>& a, const std::vector<double>& bsq, double dx) {
    double s = 0.0;
    for (size_t j = 0; j < a.size(); ++j) s += a[j] * a[j] * bsq[j];
    return s * dx;
}

// dx * sum_j 4 u1_j u2_j * gsq_j == <X^2 - Y^2, g^2> evaluated the stable way
inline double bracket_integrand(const std::vector<double>& u1, const std::vector<double>& u2,
                                const std::vector<double>& gsq, double dx) {
    double s = 0.0;
    for (size_t j = 0; j < u1.size(); ++j) s += 4.0 * u1[j] * u2[j] * gsq[j];
    return s * dx;
}

// S_{k dt} f for k = 0..n_steps, stored as squared values.
std::vector<std::vector<double>> evolved_squares(const GridFunction& f, double dt, int n_steps) {
    std::vector<std::vector<double>> out(static_cast<size_t>(n_steps) + 1);
    const double lambda = dt / (f.spec.dx * f.spec.dx);
    std::vector<double> cur = f.values;
    std::vector<double> next(cur.size());
    for (int k = 0; k <= n_steps; ++k) {
        auto& sq = out[static_cast<size_t>(k)];
        sq.resize(cur.size());
        for (size_t j = 0; j < cur.size(); ++j) sq[j] = cur[j] * cur[j];
        if (k < n_steps) {
            heat_step_into(cur, next, lambda);
            cur.swap(next);
        }
    }
    return out;
}

void validate_common(const GridSpec& grid, const GridFunction& a, const GridFunction& b,
                     double horizon, int n_steps, const SchemeParams& scheme, int replicas) {
    if (!(a.spec == grid) || !(b.spec == grid))
        throw std::invalid_argument("duality: initial data grids do not match config grid");
    if (horizon < 0.0) throw std::invalid_argument("duality: horizon must be nonnegative");
    if (horizon > 0.0) {
        if (n_steps < 1) throw std::invalid_argument("duality: n_steps must be >= 1 when T > 0");
        const double dt = horizon / n_steps;
        if (std::fabs(scheme.dt - dt) > 1e-12 * std::max(1.0, dt))
            throw std::invalid_argument("duality: scheme.dt must equal T / n_steps");
        scheme.validate(grid);
    }
    if (replicas < 2) throw std::invalid_argument("duality: at least 2 replicas required");
}

}  // namespace

double DualityConfig::dt() const { return n_steps > 0 ? horizon / n_steps : 0.0; }

void DualityConfig::validate() const {
    validate_common(grid, u1_0, u2_0, horizon, n_steps, scheme, replicas);
    if (!(phi.spec == grid)) throw std::invalid_argument("duality: phi grid does not match");
    if (phi.min_value() < 0.0) throw std::invalid_argument("duality: phi must be nonnegative");
    if (u1_0.min_value() < 0.0 || u2_0.min_value() < 0.0)
        throw std::invalid_argument("duality: initial data must be nonnegative");
}

EnsembleResult duality_lhs(const DualityConfig& cfg) {
    cfg.validate();
    EnsembleResult res;
    res.samples.assign(static_cast<size_t>(cfg.replicas), 0.0);
    std::atomic<long> clips{0};

    parallel_for_replicas(cfg.replicas, cfg.workers, [&](int i) {
        SbmState s{cfg.u1_0, cfg.u2_0, 0.0, 1.0};
        NoiseGenerator gen(SeedSpec{cfg.base_seed, cfg.stream_block_lhs + static_cast<std::uint64_t>(i)});
        StepStats stats;
        run_sbm(s, cfg.scheme, gen, cfg.n_steps, stats, [](int, const SbmState&) {});
        double xphi = 0.0;
        for (int j = 0; j < s.u1.size(); ++j) xphi += (s.u1[j] + s.u2[j]) * cfg.phi[j];
        xphi *= cfg.grid.dx;
        res.samples[static_cast<size_t>(i)] = std::exp(-xphi);
        clips += stats.clip_events;
    });

    res.estimate = estimate_from_samples(res.samples);
    res.clip_events = clips.load();
    return res;
}

EnsembleResult duality_rhs(const DualityConfig& cfg) {
    cfg.validate();

    // Y_{T-r} over the step grid, deterministic, shared read-only by replicas.
    GridFunction y0(cfg.grid, 0.0);
    for (int j = 0; j < y0.size(); ++j) y0[j] = cfg.u1_0[j] - cfg.u2_0[j];
    const auto y_sq = evolved_squares(y0, cfg.dt(), cfg.n_steps);

    GridFunction x0(cfg.grid, 0.0);
    for (int j = 0; j < x0.size(); ++j) x0[j] = cfg.u1_0[j] + cfg.u2_0[j];

    EnsembleResult res;
    res.samples.assign(static_cast<size_t>(cfg.replicas), 0.0);
    std::atomic<long> clips{0};
    const double dt = cfg.dt();
    const int n = cfg.n_steps;

    parallel_for_replicas(cfg.replicas, cfg.workers, [&](int i) {
        PamState s{cfg.phi, 0.0};
        NoiseGenerator gen(SeedSpec{cfg.base_seed, cfg.stream_block_rhs + static_cast<std::uint64_t>(i)});
        StepStats stats;
        // Trapezoid of r -> <V_r^2, Y_{T-r}^2> accumulated as the path runs.
        double running = 0.0;
        double integral = 0.0;
        if (n > 0) running = 0.5 * pair_square(s.v.values, y_sq[static_cast<size_t>(n)], cfg.grid.dx);
        run_pam(s, cfg.scheme, gen, n, stats, [&](int k, const PamState& state) {
            const double f = pair_square(state.v.values, y_sq[static_cast<size_t>(n - k)], cfg.grid.dx);
            if (k == n)
                integral = dt * (running + 0.5 * f);
            else
                running += f;
        });
        double x0v = 0.0;
        for (int j = 0; j < x0.size(); ++j) x0v += x0[j] * s.v[j];
        x0v *= cfg.grid.dx;
        res.samples[static_cast<size_t>(i)] = std::exp(-x0v - 0.5 * integral);
        clips += stats.clip_events;
    });

    res.estimate = estimate_from_samples(res.samples);
    res.clip_events = clips.load();
    return res;
}

DualityReport duality_check(const DualityConfig& cfg) {
    const EnsembleResult lhs = duality_lhs(cfg);
    const EnsembleResult rhs = duality_rhs(cfg);
    const CompareResult c = compare(lhs.estimate, rhs.estimate, cfg.z_max);
    DualityReport rep;
    rep.lhs = lhs.estimate;
    rep.rhs = rhs.estimate;
    rep.z = c.z;
    rep.pass = c.pass;
    rep.note = c.note;
    rep.clip_events_lhs = lhs.clip_events;
    rep.clip_events_rhs = rhs.clip_events;
    return rep;
}

double SelfDualityConfig::dt() const { return n_steps > 0 ? horizon / n_steps : 0.0; }

void SelfDualityConfig::validate() const {
    validate_common(grid, phi, psi, horizon, n_steps, scheme, replicas);
    if (phi.min_value() < 0.0 || psi.min_value() < 0.0)
        throw std::invalid_argument("self_duality: phi and psi must be nonnegative");
}

namespace {

EnsembleResult pam_exponential_ensemble(const GridSpec& grid, const GridFunction& start,
                                        const GridFunction& against, const SchemeParams& scheme,
                                        int n_steps, std::uint64_t base_seed,
                                        std::uint64_t stream_block, int replicas, int workers) {
    EnsembleResult res;
    res.samples.assign(static_cast<size_t>(replicas), 0.0);
    std::atomic<long> clips{0};
    parallel_for_replicas(replicas, workers, [&](int i) {
        PamState s{start, 0.0};
        NoiseGenerator gen(SeedSpec{base_seed, stream_block + static_cast<std::uint64_t>(i)});
        StepStats stats;
        run_pam(s, scheme, gen, n_steps, stats, [](int, const PamState&) {});
        double v = 0.0;
        for (int j = 0; j < s.v.size(); ++j) v += s.v[j] * against[j];
        v *= grid.dx;
        res.samples[static_cast<size_t>(i)] = std::exp(-v);
        clips += stats.clip_events;
    });
    res.estimate = estimate_from_samples(res.samples);
    res.clip_events = clips.load();
    return res;
}

}  // namespace

DualityReport self_duality_check(const SelfDualityConfig& cfg) {
    cfg.validate();
    const EnsembleResult lhs =
        pam_exponential_ensemble(cfg.grid, cfg.phi, cfg.psi, cfg.scheme, cfg.n_steps,
                                 cfg.base_seed, cfg.stream_block_lhs, cfg.replicas, cfg.workers);
    const EnsembleResult rhs =
        pam_exponential_ensemble(cfg.grid, cfg.psi, cfg.phi, cfg.scheme, cfg.n_steps,
                                 cfg.base_seed, cfg.stream_block_rhs, cfg.replicas, cfg.workers);
    const CompareResult c = compare(lhs.estimate, rhs.estimate, cfg.z_max);
    DualityReport rep;
    rep.lhs = lhs.estimate;
    rep.rhs = rhs.estimate;
    rep.z = c.z;
    rep.pass = c.pass;
    rep.note = c.note;
    rep.clip_events_lhs = lhs.clip_events;
    rep.clip_events_rhs = rhs.clip_events;
    return rep;
}

MpCheckReport mp_martingale_check(const MpCheckConfig& cfg) {
    cfg.base.validate();
    const int n = cfg.base.n_steps;
    for (int c : cfg.checkpoint_steps)
        if (c < 0 || c > n) throw std::invalid_argument("mp_check: checkpoint outside step range");

    const auto g_sq = evolved_squares(cfg.base.phi, cfg.base.dt(), n);  // (S_s phi)^2
    // S_s phi itself (for the pairing <X_t, S_{T-t} phi>).
    std::vector<std::vector<double>> g(static_cast<size_t>(n) + 1);
    {
        const double lambda = cfg.base.dt() / (cfg.base.grid.dx * cfg.base.grid.dx);
        std::vector<double> cur = cfg.base.phi.values;
        std::vector<double> next(cur.size());
        for (int k = 0; k <= n; ++k) {
            g[static_cast<size_t>(k)] = cur;
            if (k < n) {
                heat_step_into(cur, next, lambda);
                cur.swap(next);
            }
        }
    }

    const size_t n_cp = cfg.checkpoint_steps.size();
    const size_t reps = static_cast<size_t>(cfg.base.replicas);
    std::vector<std::vector<double>> m_samples(n_cp, std::vector<double>(reps, 0.0));
    std::vector<std::vector<double>> b_samples(n_cp, std::vector<double>(reps, 0.0));
    std::atomic<long> clips{0};
    const double dx = cfg.base.grid.dx;
    const double dt = cfg.base.dt();

    auto pair_with = [dx](const SbmState& s, const std::vector<double>& w) {
        double v = 0.0;
        for (size_t j = 0; j < w.size(); ++j) v += (s.u1.values[j] + s.u2.values[j]) * w[j];
        return v * dx;
    };

    parallel_for_replicas(cfg.base.replicas, cfg.base.workers, [&](int i) {
        SbmState s{cfg.base.u1_0, cfg.base.u2_0, 0.0, 1.0};
        NoiseGenerator gen(
            SeedSpec{cfg.base.base_seed, cfg.base.stream_block_lhs + static_cast<std::uint64_t>(i)});
        StepStats stats;
        const double m0 = pair_with(s, g[static_cast<size_t>(n)]);  // <X_0, S_T phi>
        double running = 0.5 * bracket_integrand(s.u1.values, s.u2.values, g_sq[static_cast<size_t>(n)], dx);
        size_t next_cp = 0;
        auto record = [&](int step, const SbmState& state, double bracket) {
            while (next_cp < n_cp && cfg.checkpoint_steps[next_cp] == step) {
                m_samples[next_cp][static_cast<size_t>(i)] =
                    pair_with(state, g[static_cast<size_t>(n - step)]) - m0;
                b_samples[next_cp][static_cast<size_t>(i)] = bracket;
                ++next_cp;
            }
        };
        record(0, s, 0.0);
        run_sbm(s, cfg.base.scheme, gen, n, stats, [&](int k, const SbmState& state) {
            const double f =
                bracket_integrand(state.u1.values, state.u2.values, g_sq[static_cast<size_t>(n - k)], dx);
            const double bracket = dt * (running + 0.5 * f);
            running += f;
            record(k, state, bracket);
        });
        clips += stats.clip_events;
    });

    // Degenerate ensembles (deterministic X) have stderr 0 with means that
    // are only floating-point residue; score those as exact.
    auto z_of = [](const MCEstimate& e) {
        if (e.stderr_mean > 0.0) return std::fabs(e.mean) / e.stderr_mean;
        return std::fabs(e.mean) <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
    };

    MpCheckReport rep;
    rep.pass = true;
    rep.clip_events = clips.load();
    for (size_t c = 0; c < n_cp; ++c) {
        MpCheckpointRow row;
        row.t = cfg.checkpoint_steps[c] * dt;
        const MCEstimate m_est = estimate_from_samples(m_samples[c]);
        row.mean_m = m_est.mean;
        row.z_mean = z_of(m_est);
        const RunningStat m_stat = pairwise_accumulate(m_samples[c]);
        row.var_m = m_stat.count() >= 2 ? m_stat.sample_variance() : 0.0;
        row.mean_bracket = estimate_from_samples(b_samples[c]).mean;
        // Paired difference M^2 - B has mean zero when the bracket matches.
        std::vector<double> diff(reps);
        for (size_t i = 0; i < reps; ++i)
            diff[i] = m_samples[c][i] * m_samples[c][i] - b_samples[c][i];
        row.z_var = z_of(estimate_from_samples(diff));
        row.pass = row.z_mean <= cfg.base.z_max && row.z_var <= cfg.base.z_max;
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<double> x_pairing_samples(const DualityConfig& cfg, std::uint64_t stream_block) {
    cfg.validate();
    std::vector<double> samples(static_cast<size_t>(cfg.replicas), 0.0);
    parallel_for_replicas(cfg.replicas, cfg.workers, [&](int i) {
        SbmState s{cfg.u1_0, cfg.u2_0, 0.0, 1.0};
        NoiseGenerator gen(SeedSpec{cfg.base_seed, stream_block + static_cast<std::uint64_t>(i)});
        StepStats stats;
        run_sbm(s, cfg.scheme, gen, cfg.n_steps, stats, [](int, const SbmState&) {});
        double xphi = 0.0;
        for (int j = 0; j < s.u1.size(); ++j) xphi += (s.u1[j] + s.u2[j]) * cfg.phi[j];
        samples[static_cast<size_t>(i)] = xphi * cfg.grid.dx;
    });
    return samples;
}

UniquenessProxyReport uniqueness_proxy_check(const UniquenessProxyConfig& cfg) {
    UniquenessProxyReport rep;
    rep.allowance = cfg.refinement_allowance;

    const std::vector<double> a = x_pairing_samples(cfg.base, cfg.base.stream_block_lhs);
    const std::vector<double> b = x_pairing_samples(cfg.base, cfg.base.stream_block_rhs);
    rep.d_same_dt = ks_two_sample_statistic(a, b);
    const double n_eff = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                         static_cast<double>(a.size() + b.size());
    rep.p_same_dt = ks_p_value(rep.d_same_dt, n_eff);
    rep.pass_same_dt = rep.p_same_dt >= cfg.min_p;

    DualityConfig refined = cfg.base;
    refined.n_steps *= 2;
    refined.scheme.dt = refined.horizon / refined.n_steps;
    refined.stream_block_lhs = cfg.base.stream_block_rhs + (1ull << 32);
    const std::vector<double> c = x_pairing_samples(refined, refined.stream_block_lhs);
    rep.d_refined = ks_two_sample_statistic(a, c);
    rep.pass_refined = rep.d_refined <= cfg.refinement_allowance;

    rep.pass = rep.pass_same_dt && rep.pass_refined;
    return rep;
}

}  // namespace sbm
