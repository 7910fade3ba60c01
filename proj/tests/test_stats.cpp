#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sbmlab/noise.hpp"
#include "sbmlab/stats.hpp"

using namespace sbm;

namespace {

std::vector<double> normals(std::uint64_t stream, int n, double mu = 0.0, double sigma = 1.0) {
    NoiseGenerator gen(SeedSpec{4242, stream});
    std::vector<double> xs(static_cast<size_t>(n));
    gen.fill_normals(xs.data(), n);
    for (double& x : xs) x = mu + sigma * x;
    return xs;
}

}  // namespace

TEST_CASE("RunningStat matches a two-pass computation") {
    const auto xs = normals(0, 5000, 1.5, 2.0);
    RunningStat s;
    for (double x : xs) s.add(x);

    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double m2 = 0.0;
    for (double x : xs) m2 += (x - mean) * (x - mean);
    const double var = m2 / static_cast<double>(xs.size() - 1);

    CHECK(s.mean() == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s.sample_variance() == doctest::Approx(var).epsilon(1e-10));
}

TEST_CASE("merge is consistent with bulk accumulation and merge order") {
    const auto xs = normals(1, 4097);
    RunningStat whole;
    for (double x : xs) whole.add(x);

    // Split at an odd boundary, merge, compare.
    RunningStat a, b;
    for (size_t i = 0; i < 1234; ++i) a.add(xs[i]);
    for (size_t i = 1234; i < xs.size(); ++i) b.add(xs[i]);
    a.merge(b);
    CHECK(a.count() == whole.count());
    CHECK(a.mean() == doctest::Approx(whole.mean()).epsilon(1e-13));
    CHECK(a.sample_variance() == doctest::Approx(whole.sample_variance()).epsilon(1e-11));

    // Pairwise reduction is a pure function of the sample order.
    const MCEstimate e1 = estimate_from_samples(xs);
    const MCEstimate e2 = estimate_from_samples(xs);
    CHECK(e1.mean == e2.mean);
    CHECK(e1.stderr_mean == e2.stderr_mean);
    CHECK(e1.mean == doctest::Approx(whole.mean()).epsilon(1e-13));
}

TEST_CASE("compare: exact equality, 10-sigma difference, degenerate stderr") {
    const MCEstimate a{0.5, 0.01, 100};
    CHECK(compare(a, a).z == 0.0);
    CHECK(compare(a, a).pass);

    // Means 10 combined-stderr apart.
    const MCEstimate b{0.5 + 10.0 * std::sqrt(2.0) * 0.01, 0.01, 100};
    const CompareResult r = compare(a, b);
    CHECK(r.z == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(!r.pass);

    const MCEstimate c{0.5, 0.0, 50};
    CHECK(compare(c, c).pass);  // both stderr 0, equal means
    const MCEstimate d{0.6, 0.0, 50};
    const CompareResult bad = compare(c, d);
    CHECK(!bad.pass);
    CHECK(!bad.note.empty());

    CHECK_THROWS_AS(compare(MCEstimate{0, 0, 1}, a), std::invalid_argument);
}

TEST_CASE("quantiles, median, fraction above") {
    std::vector<double> xs = {5, 1, 4, 2, 3};
    CHECK(median(xs) == 3.0);
    CHECK(quantile(xs, 0.0) == 1.0);
    CHECK(quantile(xs, 1.0) == 5.0);
    CHECK(quantile(xs, 0.25) == 2.0);
    CHECK(fraction_above(xs, 3.5) == doctest::Approx(0.4));
    CHECK(fraction_above(xs, 100.0) == 0.0);
}

TEST_CASE("two-sample KS: same law accepted, different law rejected") {
    const auto a = normals(2, 4000);
    const auto b = normals(3, 4000);
    const double d_same = ks_two_sample_statistic(a, b);
    const double n_eff = 4000.0 * 4000.0 / 8000.0;
    CHECK(ks_p_value(d_same, n_eff) > 0.01);

    auto shifted = normals(4, 4000, 0.25);
    const double d_diff = ks_two_sample_statistic(a, shifted);
    CHECK(ks_p_value(d_diff, n_eff) < 1e-6);
    CHECK(d_diff > d_same);
}

TEST_CASE("one-sample KS against the normal CDF") {
    const auto a = normals(5, 20000);
    CHECK(ks_statistic_vs_normal(a) < 1.62762 / std::sqrt(20000.0));

    // Uniform draws are far from normal.
    NoiseGenerator gen(SeedSpec{4242, 6});
    std::vector<double> u(20000);
    for (auto& x : u) {
        const auto blk = gen.next_block();
        x = static_cast<double>(blk[0]) / 4294967296.0;
    }
    CHECK(ks_statistic_vs_normal(u) > 0.1);
}

TEST_CASE("ks_p_value sanity") {
    CHECK(ks_p_value(0.0, 1000.0) == doctest::Approx(1.0));
    CHECK(ks_p_value(0.5, 1000.0) < 1e-10);
    const double p_mid = ks_p_value(0.03, 1000.0);
    CHECK(p_mid > 0.0);
    CHECK(p_mid < 1.0);
}

TEST_CASE("correlation of independent and of identical samples") {
    const auto a = normals(7, 100000);
    const auto b = normals(8, 100000);
    CHECK(std::fabs(correlation(a, b)) < 4.0 / std::sqrt(100000.0));
    CHECK(correlation(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fnv1a64 and hex64 are stable") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") != fnv1a64("b"));
    CHECK(hex64(0x0123456789abcdefull) == "0123456789abcdef");
    CHECK(hex64(fnv1a64("config")) .size() == 16);
}
