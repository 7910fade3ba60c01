#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sbm {

/// Welford accumulator with a parallel combine; merge is associative up to
/// floating-point reassociation, so replica results can be reduced pairwise
/// in a fixed order for bit-reproducible reports.
class RunningStat {
public:
    void add(double x);
    void merge(const RunningStat& other);

    long count() const { return n_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance (n-1 denominator); requires n >= 2.
    double sample_variance() const;
    double sample_stddev() const;
    /// Standard error of the mean: sample_stddev / sqrt(n).
    double stderr_mean() const;

private:
    long n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Monte Carlo mean, standard error and replica count for one observable.
struct MCEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
    long n = 0;
};

MCEstimate estimate_from(const RunningStat& s);

/// Deterministic pairwise reduction: result depends only on sample order,
/// never on worker scheduling.
MCEstimate estimate_from_samples(std::span<const double> samples);
RunningStat pairwise_accumulate(std::span<const double> samples);

struct CompareResult {
    double z = 0.0;
    bool pass = false;
    std::string note;
};

/// Two-sample z test on independent MC estimates: z = |mean difference| /
/// combined stderr; pass iff z <= z_max. Both stderrs zero: pass iff the
/// means are identical (degenerate deterministic case).
CompareResult compare(const MCEstimate& a, const MCEstimate& b, double z_max = 4.0);

double normal_cdf(double x);

/// q-quantile of a sample (linear interpolation between order statistics).
double quantile(std::vector<double> samples, double q);
double median(std::vector<double> samples);
double fraction_above(std::span<const double> samples, double eps);

/// One-sample Kolmogorov-Smirnov statistic against the standard normal CDF.
double ks_statistic_vs_normal(std::vector<double> samples);

/// Two-sample KS statistic D = sup |F_a - F_b|.
double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sided KS p-value with the usual small-sample correction;
/// n_eff = n_a n_b / (n_a + n_b) for two samples, n for one sample.
double ks_p_value(double d, double n_eff);

/// Pearson correlation of paired samples.
double correlation(std::span<const double> x, std::span<const double> y);

/// FNV-1a 64-bit hash, used for config fingerprints in CSV rows.
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

}  // namespace sbm
