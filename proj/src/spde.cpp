#include "sbmlab/spde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbm {

void SchemeParams::validate(const GridSpec& spec) const {
    if (!(dt > 0.0)) throw std::invalid_argument("SchemeParams: dt must be positive");
    if (lambda(spec) > 1.0 + 1e-12)
        throw std::invalid_argument("SchemeParams: stability bound lambda = dt/dx^2 <= 1 violated");
    if (rho_override && std::fabs(*rho_override) > 1.0)
        throw std::invalid_argument("SchemeParams: rho_override must lie in [-1, 1]");
}

void SbmState::validate() const {
    if (!(u1.spec == u2.spec)) throw std::invalid_argument("SbmState: components on different grids");
    if (std::fabs(rho) > 1.0) throw std::invalid_argument("SbmState: rho must lie in [-1, 1]");
    if (u1.min_value() < 0.0 || u2.min_value() < 0.0)
        throw std::invalid_argument("SbmState: components must be nonnegative");
    if (!u1.all_finite() || !u2.all_finite())
        throw std::invalid_argument("SbmState: non-finite values");
}

void PamState::validate() const {
    if (v.min_value() < 0.0) throw std::invalid_argument("PamState: field must be nonnegative");
    if (!v.all_finite()) throw std::invalid_argument("PamState: non-finite values");
}

namespace {

inline long clip_nonnegative(std::vector<double>& v) {
    long events = 0;
    for (double& x : v) {
        if (x < 0.0) {
            x = 0.0;
            ++events;
        }
    }
    return events;
}

}  // namespace

void step_sbm(SbmState& s, const SchemeParams& p, const NoiseIncrement& n, StepStats& stats,
              StepWorkspace& ws) {
    const GridSpec& spec = s.u1.spec;
    p.validate(spec);
    if (static_cast<int>(n.xi.size()) != spec.points || !n.xi2 ||
        static_cast<int>(n.xi2->size()) != spec.points)
        throw std::invalid_argument("step_sbm: noise increment does not match state grid");

    const double lambda = p.lambda(spec) * p.drift_scale;
    const double amp = p.noise_scale * std::sqrt(p.dt / spec.dx);
    heat_step_into(s.u1.values, ws.a, lambda);
    heat_step_into(s.u2.values, ws.b, lambda);
    const auto& xi1 = n.xi;
    const auto& xi2 = *n.xi2;
    const NegativityPolicy policy = p.policy();
    if (policy == NegativityPolicy::FullTruncation) {
        for (int j = 0; j < spec.points; ++j) {
            const size_t i = static_cast<size_t>(j);
            const double b =
                std::sqrt(std::max(s.u1.values[i], 0.0) * std::max(s.u2.values[i], 0.0)) * amp;
            ws.a[i] += b * xi1[i];
            ws.b[i] += b * xi2[i];
        }
    } else {
        for (int j = 0; j < spec.points; ++j) {
            const size_t i = static_cast<size_t>(j);
            // max() guards transient roundoff negatives; the state is clipped nonnegative.
            const double b = std::sqrt(std::max(s.u1.values[i] * s.u2.values[i], 0.0)) * amp;
            ws.a[i] += b * xi1[i];
            ws.b[i] += b * xi2[i];
        }
    }
    if (policy == NegativityPolicy::ClipState) {
        stats.clip_events += clip_nonnegative(ws.a);
        stats.clip_events += clip_nonnegative(ws.b);
    }
    s.u1.values.swap(ws.a);
    s.u2.values.swap(ws.b);
    s.t += p.dt;
}

void step_pam(PamState& s, const SchemeParams& p, const NoiseIncrement& n, StepStats& stats,
              StepWorkspace& ws) {
    const GridSpec& spec = s.v.spec;
    p.validate(spec);
    if (static_cast<int>(n.xi.size()) != spec.points)
        throw std::invalid_argument("step_pam: noise increment does not match state grid");

    const double lambda = p.lambda(spec) * p.drift_scale;
    const double amp = p.noise_scale * std::sqrt(p.dt / spec.dx);
    heat_step_into(s.v.values, ws.a, lambda);
    const NegativityPolicy policy = p.policy();
    for (int j = 0; j < spec.points; ++j) {
        const size_t i = static_cast<size_t>(j);
        const double v = policy == NegativityPolicy::FullTruncation
                             ? std::max(s.v.values[i], 0.0)
                             : s.v.values[i];
        ws.a[i] += v * amp * n.xi[i];
    }
    if (policy == NegativityPolicy::ClipState) stats.clip_events += clip_nonnegative(ws.a);
    s.v.values.swap(ws.a);
    s.t += p.dt;
}

SbmState step_sbm(const SbmState& s, const SchemeParams& p, const NoiseIncrement& n) {
    SbmState out = s;
    StepStats stats;
    StepWorkspace ws;
    step_sbm(out, p, n, stats, ws);
    return out;
}

PamState step_pam(const PamState& s, const SchemeParams& p, const NoiseIncrement& n) {
    PamState out = s;
    StepStats stats;
    StepWorkspace ws;
    step_pam(out, p, n, stats, ws);
    return out;
}

std::pair<GridFunction, GridFunction> xy_view(const SbmState& s) {
    GridFunction x(s.u1.spec, 0.0);
    GridFunction y(s.u1.spec, 0.0);
    for (int j = 0; j < s.u1.size(); ++j) {
        x[j] = s.u1[j] + s.u2[j];
        y[j] = s.u1[j] - s.u2[j];
    }
    return {std::move(x), std::move(y)};
}

namespace {

void check_checkpoints(const std::vector<int>& steps, int n_steps) {
    int prev = -1;
    for (int s : steps) {
        if (s < 0 || s > n_steps)
            throw std::invalid_argument("simulate: checkpoint step outside [0, n_steps]");
        if (s <= prev) throw std::invalid_argument("simulate: checkpoint steps must be strictly increasing");
        prev = s;
    }
}

double observe_sbm(const SbmState& s, const ObservableSpec& o) {
    auto value_of = [&](const GridFunction& f) {
        return o.weight ? pair(f, *o.weight) : total_mass(f);
    };
    switch (o.target) {
        case ObservableTarget::U1: return value_of(s.u1);
        case ObservableTarget::U2: return value_of(s.u2);
        case ObservableTarget::X: {
            GridFunction x(s.u1.spec, 0.0);
            for (int j = 0; j < s.u1.size(); ++j) x[j] = s.u1[j] + s.u2[j];
            return value_of(x);
        }
        case ObservableTarget::Y: {
            GridFunction y(s.u1.spec, 0.0);
            for (int j = 0; j < s.u1.size(); ++j) y[j] = s.u1[j] - s.u2[j];
            return value_of(y);
        }
        case ObservableTarget::V:
            throw std::invalid_argument("simulate_sbm: observable targets V");
    }
    return 0.0;
}

}  // namespace

Trajectory simulate_sbm(const SbmState& initial, const SchemeParams& p, SeedSpec seed,
                        int n_steps, const std::vector<int>& checkpoint_steps,
                        const std::vector<ObservableSpec>& observables, bool record_fields) {
    initial.validate();
    check_checkpoints(checkpoint_steps, n_steps);
    Trajectory traj;
    for (const auto& o : observables) traj.series[o.name] = {};

    SbmState s = initial;
    NoiseGenerator gen(seed);
    const bool truncated = p.policy() == NegativityPolicy::FullTruncation;
    size_t next_cp = 0;
    auto record = [&](int step, const SbmState& state) {
        if (next_cp < checkpoint_steps.size() && checkpoint_steps[next_cp] == step) {
            SbmState view;
            const SbmState* reported = &state;
            if (truncated) {
                view = state;
                view.u1 = positive_part(state.u1);
                view.u2 = positive_part(state.u2);
                reported = &view;
            }
            traj.times.push_back(reported->t);
            for (const auto& o : observables) traj.series[o.name].push_back(observe_sbm(*reported, o));
            if (record_fields) {
                traj.fields.emplace_back("u1@" + std::to_string(reported->t), reported->u1);
                traj.fields.emplace_back("u2@" + std::to_string(reported->t), reported->u2);
            }
            ++next_cp;
        }
    };
    record(0, s);
    run_sbm(s, p, gen, n_steps, traj.stats, record);
    return traj;
}

Trajectory simulate_pam(const PamState& initial, const SchemeParams& p, SeedSpec seed,
                        int n_steps, const std::vector<int>& checkpoint_steps,
                        const std::vector<ObservableSpec>& observables, bool record_fields) {
    initial.validate();
    check_checkpoints(checkpoint_steps, n_steps);
    Trajectory traj;
    for (const auto& o : observables) traj.series[o.name] = {};

    PamState s = initial;
    NoiseGenerator gen(seed);
    const bool truncated = p.policy() == NegativityPolicy::FullTruncation;
    size_t next_cp = 0;
    auto record = [&](int step, const PamState& state) {
        if (next_cp < checkpoint_steps.size() && checkpoint_steps[next_cp] == step) {
            const GridFunction reported = truncated ? positive_part(state.v) : state.v;
            traj.times.push_back(state.t);
            for (const auto& o : observables) {
                if (o.target != ObservableTarget::V)
                    throw std::invalid_argument("simulate_pam: observable must target V");
                traj.series[o.name].push_back(o.weight ? pair(reported, *o.weight)
                                                       : total_mass(reported));
            }
            if (record_fields) traj.fields.emplace_back("v@" + std::to_string(state.t), reported);
            ++next_cp;
        }
    };
    record(0, s);
    run_pam(s, p, gen, n_steps, traj.stats, record);
    return traj;
}

}  // namespace sbm
