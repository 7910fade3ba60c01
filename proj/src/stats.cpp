#include "sbmlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbm {

void RunningStat::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningStat::merge(const RunningStat& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double delta = other.mean_ - mean_;
    const double n_total = na + nb;
    mean_ += delta * (nb / n_total);
    m2_ += other.m2_ + delta * delta * (na * nb / n_total);
    n_ += other.n_;
}

double RunningStat::sample_variance() const {
    if (n_ < 2) throw std::logic_error("RunningStat: variance needs at least 2 samples");
    return m2_ / static_cast<double>(n_ - 1);
}

double RunningStat::sample_stddev() const { return std::sqrt(std::max(0.0, sample_variance())); }

double RunningStat::stderr_mean() const {
    return sample_stddev() / std::sqrt(static_cast<double>(n_));
}

MCEstimate estimate_from(const RunningStat& s) {
    if (s.count() < 2) throw std::logic_error("MCEstimate: needs at least 2 replicas");
    return MCEstimate{s.mean(), s.stderr_mean(), s.count()};
}

RunningStat pairwise_accumulate(std::span<const double> samples) {
    // Recursion bottoms out on short runs of sequential adds; the merge tree
    // shape depends only on the sample count.
    if (samples.size() <= 64) {
        RunningStat s;
        for (double x : samples) s.add(x);
        return s;
    }
    const size_t half = samples.size() / 2;
    RunningStat left = pairwise_accumulate(samples.subspan(0, half));
    const RunningStat right = pairwise_accumulate(samples.subspan(half));
    left.merge(right);
    return left;
}

MCEstimate estimate_from_samples(std::span<const double> samples) {
    return estimate_from(pairwise_accumulate(samples));
}

CompareResult compare(const MCEstimate& a, const MCEstimate& b, double z_max) {
    if (a.n < 2 || b.n < 2) throw std::invalid_argument("compare: both estimates need n >= 2");
    CompareResult r;
    const double spread = std::sqrt(a.stderr_mean * a.stderr_mean + b.stderr_mean * b.stderr_mean);
    const double diff = std::fabs(a.mean - b.mean);
    if (spread == 0.0) {
        if (diff == 0.0) {
            r.z = 0.0;
            r.pass = true;
            r.note = "degenerate: both stderr 0, means identical";
        } else {
            r.z = std::numeric_limits<double>::infinity();
            r.pass = false;
            r.note = "degenerate: both stderr 0 but means differ";
        }
        return r;
    }
    r.z = diff / spread;
    r.pass = r.z <= z_max;
    return r;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double quantile(std::vector<double> samples, double q) {
    if (samples.empty()) throw std::invalid_argument("quantile: empty sample");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q must lie in [0,1]");
    std::sort(samples.begin(), samples.end());
    const double pos = q * static_cast<double>(samples.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, samples.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return samples[lo] * (1.0 - frac) + samples[hi] * frac;
}

double median(std::vector<double> samples) { return quantile(std::move(samples), 0.5); }

double fraction_above(std::span<const double> samples, double eps) {
    if (samples.empty()) return 0.0;
    size_t count = 0;
    for (double x : samples)
        if (x > eps) ++count;
    return static_cast<double>(count) / static_cast<double>(samples.size());
}

double ks_statistic_vs_normal(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("ks: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double cdf = normal_cdf(samples[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(std::fabs(cdf - lo), std::fabs(hi - cdf)));
    }
    return d;
}

double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_p_value(double d, double n_eff) {
    const double sq = std::sqrt(n_eff);
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Dual theta series for the CDF; the alternating tail series converges
        // too slowly here.
        const double t = std::exp(-M_PI * M_PI / (8.0 * lambda * lambda));
        const double cdf =
            std::sqrt(2.0 * M_PI) / lambda * (t + std::pow(t, 9) + std::pow(t, 25) + std::pow(t, 49));
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    // Kolmogorov tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("correlation: paired samples of equal size >= 2 required");
    RunningStat sx, sy;
    for (double v : x) sx.add(v);
    for (double v : y) sy.add(v);
    double cov = 0.0;
    for (size_t i = 0; i < x.size(); ++i) cov += (x[i] - sx.mean()) * (y[i] - sy.mean());
    cov /= static_cast<double>(x.size() - 1);
    return cov / (sx.sample_stddev() * sy.sample_stddev());
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

}  // namespace sbm
