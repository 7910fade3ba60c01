#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbmlab/grid.hpp"
#include "sbmlab/initial_data.hpp"
#include "sbmlab/noise.hpp"
#include "sbmlab/parallel.hpp"
#include "sbmlab/spde.hpp"
#include "sbmlab/stats.hpp"

using namespace sbm;

namespace {

const GridSpec kGrid = make_grid(5.0, 64);

SchemeParams scheme_for(const GridSpec& g, double lambda, bool clip = true) {
    SchemeParams p;
    p.dt = lambda * g.dx * g.dx;
    p.clip_negative = clip;
    return p;
}

SbmState bump_state(double rho, double mass1 = 1.5, double mass2 = 1.0) {
    return SbmState{sample(kGrid, gaussian_bump_with_mass(mass1, 0.0, 0.5) + constant_data(0.2)),
                    sample(kGrid, gaussian_bump_with_mass(mass2, 0.0, 0.5)), 0.0, rho};
}

}  // namespace

TEST_CASE("step_sbm with U2 = 0: noise coefficient vanishes, U1 is pure heat flow") {
    SbmState s{sample(kGrid, gaussian_bump(1.0, 0.0, 0.6)), constant(kGrid, 0.0), 0.0, 1.0};
    const SchemeParams p = scheme_for(kGrid, 0.5);
    NoiseGenerator gen(SeedSpec{7, 0});
    const NoiseIncrement inc = correlated_pair(gen, kGrid.points, s.rho);
    const GridFunction expected = heat_step(s.u1, p.dt);

    const SbmState out = step_sbm(s, p, inc);
    for (int j = 0; j < kGrid.points; ++j) {
        CHECK(out.u1[j] == expected[j]);  // bit-for-bit: the noise term is exactly zero
        CHECK(out.u2[j] == 0.0);
    }
    CHECK(out.t == doctest::Approx(p.dt));
}

TEST_CASE("step_sbm rho = +-1 cancellation before clipping") {
    const SchemeParams p = scheme_for(kGrid, 0.5, false);

    SbmState plus = bump_state(1.0);
    NoiseGenerator gen(SeedSpec{99, 0});
    const NoiseIncrement inc = correlated_pair(gen, kGrid.points, 1.0);
    GridFunction diff0(kGrid, 0.0);
    for (int j = 0; j < kGrid.points; ++j) diff0[j] = plus.u1[j] - plus.u2[j];
    const GridFunction diff_expected = heat_step(diff0, p.dt);
    const SbmState out = step_sbm(plus, p, inc);
    for (int j = 0; j < kGrid.points; ++j)
        CHECK(std::fabs(out.u1[j] - out.u2[j] - diff_expected[j]) <= 1e-13);

    SbmState minus = bump_state(-1.0);
    const NoiseIncrement inc2 = correlated_pair(gen, kGrid.points, -1.0);
    GridFunction sum0(kGrid, 0.0);
    for (int j = 0; j < kGrid.points; ++j) sum0[j] = minus.u1[j] + minus.u2[j];
    const GridFunction sum_expected = heat_step(sum0, p.dt);
    const SbmState out2 = step_sbm(minus, p, inc2);
    for (int j = 0; j < kGrid.points; ++j)
        CHECK(std::fabs(out2.u1[j] + out2.u2[j] - sum_expected[j]) <= 1e-13);
}

TEST_CASE("rho = 1 cancellation composes over 1000 unclipped steps at 1e-10 relative") {
    const SchemeParams p = scheme_for(kGrid, 0.5, false);
    SbmState s = bump_state(1.0);
    GridFunction y(kGrid, 0.0);
    for (int j = 0; j < kGrid.points; ++j) y[j] = s.u1[j] - s.u2[j];

    NoiseGenerator gen(SeedSpec{2024, 5});
    StepStats stats;
    std::vector<double> ybuf = y.values, ynext(y.values.size());
    const double lambda = p.lambda(kGrid);
    run_sbm(s, p, gen, 1000, stats, [&](int, const SbmState&) {
        heat_step_into(ybuf, ynext, lambda);
        ybuf.swap(ynext);
    });
    double sup_y = 0.0, sup_err = 0.0;
    for (int j = 0; j < kGrid.points; ++j) {
        sup_y = std::max(sup_y, std::fabs(ybuf[static_cast<size_t>(j)]));
        sup_err = std::max(sup_err, std::fabs(s.u1[j] - s.u2[j] - ybuf[static_cast<size_t>(j)]));
    }
    CHECK(sup_err <= 1e-10 * std::max(sup_y, 1e-30));
}

TEST_CASE("step_pam: zero is absorbing, linearity before clipping is exact") {
    const SchemeParams p = scheme_for(kGrid, 0.5, false);
    NoiseGenerator gen(SeedSpec{11, 0});
    const NoiseIncrement inc = white_increment(gen, kGrid.points);

    PamState zero{constant(kGrid, 0.0), 0.0};
    const PamState z1 = step_pam(zero, p, inc);
    for (int j = 0; j < kGrid.points; ++j) CHECK(z1.v[j] == 0.0);

    PamState v{sample(kGrid, gaussian_bump(1.0, 0.3, 0.5)), 0.0};
    PamState v2{v.v, 0.0};
    for (int j = 0; j < kGrid.points; ++j) v2.v[j] = 2.0 * v.v[j];
    const PamState s1 = step_pam(v, p, inc);
    const PamState s2 = step_pam(v2, p, inc);
    for (int j = 0; j < kGrid.points; ++j) CHECK(s2.v[j] == 2.0 * s1.v[j]);  // doubling is lossless
}

TEST_CASE("one unclipped step from constant data realizes the mild-form increment") {
    // For constant c the Laplacian vanishes, so the update is exactly
    // c + sigma(c) sqrt(dt/dx) xi with sigma(c) = c for the linear field;
    // mean c and variance c^2 dt/dx per cell are the first-order mild
    // increment in the cell-average convention.
    const double c = 2.0;
    const SchemeParams p = scheme_for(kGrid, 0.5, false);
    const double amp = std::sqrt(p.dt / kGrid.dx);
    for (double xi : {-1.7, -0.3, 0.0, 0.9, 2.4}) {
        NoiseIncrement inc;
        inc.xi.assign(static_cast<size_t>(kGrid.points), xi);
        PamState s{constant(kGrid, c), 0.0};
        const PamState out = step_pam(s, p, inc);
        for (int j = 0; j < kGrid.points; ++j)
            CHECK(out.v[j] == doctest::Approx(c + c * amp * xi).epsilon(1e-14));
    }
}

TEST_CASE("step_pam mass is a martingale: MC mean over 1e4 one-step replicas") {
    const SchemeParams p = scheme_for(kGrid, 0.5);
    const GridFunction v0 = sample(kGrid, gaussian_bump_with_mass(1.0, 0.0, 0.5));
    const double m0 = total_mass(v0);
    const int n = 10000;
    std::vector<double> masses(n);
    parallel_for_replicas(n, 2, [&](int i) {
        NoiseGenerator gen(SeedSpec{31415, static_cast<std::uint64_t>(i)});
        const NoiseIncrement inc = white_increment(gen, kGrid.points);
        PamState s{v0, 0.0};
        const PamState out = step_pam(s, p, inc);
        masses[static_cast<size_t>(i)] = total_mass(out.v);
    });
    const MCEstimate est = estimate_from_samples(masses);
    CHECK(std::fabs(est.mean - m0) <= 4.0 * est.stderr_mean);
}

TEST_CASE("xy_view identities") {
    SbmState equal{sample(kGrid, gaussian_bump(1.0, 0.0, 0.5)),
                   sample(kGrid, gaussian_bump(1.0, 0.0, 0.5)), 0.0, 1.0};
    auto [x, y] = xy_view(equal);
    for (int j = 0; j < kGrid.points; ++j) {
        CHECK(y[j] == 0.0);
        CHECK(x[j] == 2.0 * equal.u1[j]);
    }

    SbmState solo{sample(kGrid, gaussian_bump(0.7, 0.4, 0.5)), constant(kGrid, 0.0), 0.0, 1.0};
    auto [x2, y2] = xy_view(solo);
    for (int j = 0; j < kGrid.points; ++j) {
        CHECK(x2[j] == solo.u1[j]);
        CHECK(y2[j] == solo.u1[j]);
    }

    // X >= |Y| along a stochastic path with clipping on.
    SbmState s = bump_state(1.0);
    NoiseGenerator gen(SeedSpec{5, 0});
    StepStats stats;
    run_sbm(s, scheme_for(kGrid, 0.5), gen, 50, stats, [](int, const SbmState& st) {
        auto [xs, ys] = xy_view(st);
        for (int j = 0; j < st.u1.size(); ++j) CHECK(xs[j] >= std::fabs(ys[j]));
    });
}

TEST_CASE("clipping keeps fields nonnegative and counts events") {
    SchemeParams p = scheme_for(kGrid, 0.5);
    p.noise_scale = 3.0;  // force frequent negative excursions
    SbmState s = bump_state(1.0);
    NoiseGenerator gen(SeedSpec{123, 0});
    StepStats stats;
    run_sbm(s, p, gen, 200, stats, [](int, const SbmState& st) {
        CHECK(st.u1.min_value() >= 0.0);
        CHECK(st.u2.min_value() >= 0.0);
    });
    CHECK(stats.clip_events > 0);
}

TEST_CASE("scheme parameter and noise-shape validation") {
    SchemeParams p = scheme_for(kGrid, 1.2);
    SbmState s = bump_state(1.0);
    NoiseGenerator gen(SeedSpec{1, 0});
    const NoiseIncrement inc = correlated_pair(gen, kGrid.points, 1.0);
    CHECK_THROWS_AS(step_sbm(s, p, inc), std::invalid_argument);

    const NoiseIncrement wrong_size = correlated_pair(gen, 32, 1.0);
    CHECK_THROWS_AS(step_sbm(s, scheme_for(kGrid, 0.5), wrong_size), std::invalid_argument);

    const NoiseIncrement no_pair = white_increment(gen, kGrid.points);
    CHECK_THROWS_AS(step_sbm(s, scheme_for(kGrid, 0.5), no_pair), std::invalid_argument);

    PamState v{constant(kGrid, 1.0), 0.0};
    CHECK_THROWS_AS(step_pam(v, scheme_for(kGrid, 0.5), wrong_size), std::invalid_argument);
}

TEST_CASE("simulate_pam with V0 = 0: all observables zero at all checkpoints") {
    const SchemeParams p = scheme_for(kGrid, 0.5);
    PamState init{constant(kGrid, 0.0), 0.0};
    std::vector<ObservableSpec> obs;
    obs.push_back({"mass", ObservableTarget::V, std::nullopt});
    obs.push_back({"vg", ObservableTarget::V, sample(kGrid, gaussian_bump(1.0, 0.0, 0.5))});
    const Trajectory traj = simulate_pam(init, p, SeedSpec{3, 0}, 40, {0, 10, 20, 40}, obs);
    REQUIRE(traj.times.size() == 4);
    for (const auto& [name, vals] : traj.series)
        for (double v : vals) CHECK(v == 0.0);
}

TEST_CASE("simulate_sbm rho = 1: Y observables follow the deterministic heat flow") {
    SchemeParams p = scheme_for(kGrid, 0.5, false);
    const SbmState init = bump_state(1.0);
    const GridFunction w = sample(kGrid, gaussian_bump(1.0, 0.5, 0.4));
    std::vector<ObservableSpec> obs;
    obs.push_back({"y_w", ObservableTarget::Y, w});
    const std::vector<int> cps = {0, 100, 500, 1000};
    const Trajectory traj = simulate_sbm(init, p, SeedSpec{77, 0}, 1000, cps, obs);

    GridFunction y0(kGrid, 0.0);
    for (int j = 0; j < kGrid.points; ++j) y0[j] = init.u1[j] - init.u2[j];
    for (size_t k = 0; k < cps.size(); ++k) {
        const GridFunction yk = heat_semigroup(y0, cps[k] * p.dt, p.dt);
        const double expected = pair(yk, w);
        CHECK(std::fabs(traj.series.at("y_w")[k] - expected) <=
              1e-10 * std::max(1.0, std::fabs(expected)));
    }
}

TEST_CASE("simulate_sbm with U2_0 = 0 reproduces the deterministic heat trajectory bit-for-bit") {
    const SchemeParams p = scheme_for(kGrid, 0.5);
    SbmState init{sample(kGrid, gaussian_bump(1.0, -0.5, 0.5)), constant(kGrid, 0.0), 0.0, 1.0};
    std::vector<ObservableSpec> obs;
    obs.push_back({"m1", ObservableTarget::U1, std::nullopt});
    const Trajectory traj = simulate_sbm(init, p, SeedSpec{8, 0}, 200, {50, 200}, obs);
    GridFunction u = init.u1;
    u = heat_semigroup(u, 50 * p.dt, p.dt);
    CHECK(traj.series.at("m1")[0] == total_mass(u));
    u = heat_semigroup(u, 150 * p.dt, p.dt);
    CHECK(traj.series.at("m1")[1] == total_mass(u));
    CHECK(traj.stats.clip_events == 0);
}

TEST_CASE("simulate is a pure function of (initial, params, seed)") {
    const SchemeParams p = scheme_for(kGrid, 0.5);
    const SbmState init = bump_state(1.0);
    std::vector<ObservableSpec> obs;
    obs.push_back({"m1", ObservableTarget::U1, std::nullopt});
    obs.push_back({"m2", ObservableTarget::U2, std::nullopt});
    const Trajectory a = simulate_sbm(init, p, SeedSpec{42, 3}, 100, {25, 50, 100}, obs);
    const Trajectory b = simulate_sbm(init, p, SeedSpec{42, 3}, 100, {25, 50, 100}, obs);
    CHECK(a.series.at("m1") == b.series.at("m1"));
    CHECK(a.series.at("m2") == b.series.at("m2"));

    const Trajectory c = simulate_sbm(init, p, SeedSpec{42, 4}, 100, {25, 50, 100}, obs);
    CHECK(a.series.at("m1") != c.series.at("m1"));
}

TEST_CASE("simulate rejects bad checkpoints") {
    const SchemeParams p = scheme_for(kGrid, 0.5);
    const SbmState init = bump_state(1.0);
    CHECK_THROWS_AS(simulate_sbm(init, p, SeedSpec{1, 0}, 10, {5, 5}, {}), std::invalid_argument);
    CHECK_THROWS_AS(simulate_sbm(init, p, SeedSpec{1, 0}, 10, {11}, {}), std::invalid_argument);
    CHECK_THROWS_AS(simulate_sbm(init, p, SeedSpec{1, 0}, 10, {-1}, {}), std::invalid_argument);
}

TEST_CASE("fault injection knobs change the dynamics") {
    const SbmState init = bump_state(1.0);
    NoiseGenerator g1(SeedSpec{10, 0}), g2(SeedSpec{10, 0}), g3(SeedSpec{10, 0});
    StepStats st;

    SchemeParams faithful = scheme_for(kGrid, 0.5);
    SbmState a = init;
    run_sbm(a, faithful, g1, 20, st, [](int, const SbmState&) {});

    SchemeParams scaled = faithful;
    scaled.noise_scale = 2.0;
    SbmState b = init;
    run_sbm(b, scaled, g2, 20, st, [](int, const SbmState&) {});
    CHECK(a.u1.values != b.u1.values);

    // rho override: with wrong-rho = -1 the sum becomes deterministic instead
    // of the difference.
    SchemeParams wrong = faithful;
    wrong.clip_negative = false;
    wrong.rho_override = -1.0;
    SbmState c = init;
    run_sbm(c, wrong, g3, 50, st, [](int, const SbmState&) {});
    GridFunction sum0(kGrid, 0.0);
    for (int j = 0; j < kGrid.points; ++j) sum0[j] = init.u1[j] + init.u2[j];
    const GridFunction sum_ref = heat_semigroup(sum0, 50 * faithful.dt, faithful.dt);
    for (int j = 0; j < kGrid.points; ++j)
        CHECK(std::fabs(c.u1[j] + c.u2[j] - sum_ref[j]) <= 1e-11 * std::max(1.0, sum_ref[j]));
}

TEST_CASE("full truncation: no injection, exact state-mass martingale, clipped reporting") {
    SchemeParams p = scheme_for(kGrid, 0.5);
    p.negativity = NegativityPolicy::FullTruncation;

    // The state evolves unclipped with sigma at positive parts; per-step the
    // expected mass change is exactly zero, so a long path's state mass stays
    // an unbiased martingale and no clip events are counted.
    SbmState s = bump_state(1.0);
    NoiseGenerator gen(SeedSpec{2040, 0});
    StepStats stats;
    run_sbm(s, p, gen, 400, stats, [](int, const SbmState&) {});
    CHECK(stats.clip_events == 0);

    // Reported trajectories clip at observation: all recorded series values
    // correspond to nonnegative fields.
    std::vector<ObservableSpec> obs;
    obs.push_back({"m2", ObservableTarget::U2, std::nullopt});
    const Trajectory traj = simulate_sbm(bump_state(1.0), p, SeedSpec{2041, 0}, 300, {100, 300}, obs);
    for (double v : traj.series.at("m2")) CHECK(v >= 0.0);

    // rho = 1 difference identity survives clipped observation: the state is
    // never modified, so Y stays the exact heat flow.
    SbmState t = bump_state(1.0);
    GridFunction y0(kGrid, 0.0);
    for (int j = 0; j < kGrid.points; ++j) y0[j] = t.u1[j] - t.u2[j];
    NoiseGenerator gen2(SeedSpec{2042, 0});
    StepStats st2;
    run_sbm(t, p, gen2, 500, st2, [](int, const SbmState&) {});
    const GridFunction yref = heat_semigroup(y0, 500 * p.dt, p.dt);
    for (int j = 0; j < kGrid.points; ++j)
        CHECK(std::fabs(t.u1[j] - t.u2[j] - yref[j]) <= 1e-11 * std::max(1.0, std::fabs(yref[j])));

    // PAM under full truncation: sigma at V^+ keeps dead cells dead.
    PamState dead{constant(kGrid, 0.0), 0.0};
    NoiseGenerator gen3(SeedSpec{2043, 0});
    StepStats st3;
    run_pam(dead, p, gen3, 50, st3, [](int, const PamState& v) {
        for (double x : v.v.values) CHECK(x == 0.0);
    });
}

TEST_CASE("state validation") {
    SbmState bad{constant(kGrid, 1.0), constant(make_grid(5.0, 32), 1.0), 0.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    SbmState neg{constant(kGrid, -0.1), constant(kGrid, 1.0), 0.0, 1.0};
    CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
    SbmState rho{constant(kGrid, 1.0), constant(kGrid, 1.0), 0.0, 1.5};
    CHECK_THROWS_AS(rho.validate(), std::invalid_argument);
    PamState ok{constant(kGrid, 0.5), 0.0};
    CHECK_NOTHROW(ok.validate());
}
