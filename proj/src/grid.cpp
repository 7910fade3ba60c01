#include "sbmlab/grid.hpp"

#include <algorithm>
#include <limits>

namespace sbm {

GridSpec make_grid(double half_width, int points) {
    if (!(half_width > 0.0))
        throw std::invalid_argument("make_grid: half_width L must be positive");
    if (points < 4)
        throw std::invalid_argument("make_grid: N must be at least 4");
    if (points % 2 != 0)
        throw std::invalid_argument("make_grid: N must be even");
    GridSpec spec;
    spec.half_width = half_width;
    spec.points = points;
    spec.dx = 2.0 * half_width / points;
    return spec;
}

GridFunction::GridFunction(GridSpec s, std::vector<double> v) : spec(s), values(std::move(v)) {
    if (static_cast<int>(values.size()) != spec.points)
        throw std::invalid_argument("GridFunction: value count does not match grid N");
}

GridFunction::GridFunction(GridSpec s, double fill)
    : spec(s), values(static_cast<size_t>(s.points), fill) {}

bool GridFunction::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double GridFunction::min_value() const {
    return *std::min_element(values.begin(), values.end());
}

double GridFunction::max_value() const {
    return *std::max_element(values.begin(), values.end());
}

double GridFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

GridFunction constant(const GridSpec& spec, double c) { return GridFunction(spec, c); }

namespace detail {

double compensated_sum(const double* v, size_t n) {
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double t = sum + v[i];
        if (std::fabs(sum) >= std::fabs(v[i]))
            comp += (sum - t) + v[i];
        else
            comp += (v[i] - t) + sum;
        sum = t;
    }
    return sum + comp;
}

void require_same_spec(const GridFunction& f, const GridFunction& g, const char* op) {
    if (!(f.spec == g.spec))
        throw std::invalid_argument(std::string(op) + ": grid specs do not match");
}

}  // namespace detail

double pair(const GridFunction& f, const GridFunction& g) {
    detail::require_same_spec(f, g, "pair");
    const size_t n = f.values.size();
    std::vector<double> prod(n);
    for (size_t j = 0; j < n; ++j) prod[j] = f.values[j] * g.values[j];
    return f.spec.dx * detail::compensated_sum(prod.data(), n);
}

double total_mass(const GridFunction& f) {
    return f.spec.dx * detail::compensated_sum(f.values.data(), f.values.size());
}

double mean_bar(const GridFunction& f) { return total_mass(f) / f.spec.length(); }

double heat_kernel(double t, double x) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be positive");
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * M_PI * t);
}

void heat_step_into(const std::vector<double>& in, std::vector<double>& out, double lambda) {
    const size_t n = in.size();
    out.resize(n);
    const double keep = 1.0 - lambda;
    const double half = 0.5 * lambda;
    out[0] = keep * in[0] + half * (in[n - 1] + in[1]);
    for (size_t j = 1; j + 1 < n; ++j) out[j] = keep * in[j] + half * (in[j - 1] + in[j + 1]);
    out[n - 1] = keep * in[n - 1] + half * (in[n - 2] + in[0]);
}

GridFunction heat_step(const GridFunction& f, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("heat_step: dt must be positive");
    const double lambda = dt / (f.spec.dx * f.spec.dx);
    if (lambda > 1.0 + 1e-12)
        throw std::invalid_argument("heat_step: stability bound lambda = dt/dx^2 <= 1 violated");
    GridFunction out(f.spec, 0.0);
    heat_step_into(f.values, out.values, lambda);
    return out;
}

GridFunction heat_semigroup(const GridFunction& f, double t, double dt) {
    if (t < 0.0) throw std::invalid_argument("heat_semigroup: t must be nonnegative");
    if (!(dt > 0.0)) throw std::invalid_argument("heat_semigroup: dt must be positive");
    if (t == 0.0) return f;

    // Snap t to the step grid when it is an exact multiple of dt up to roundoff.
    const double ratio = t / dt;
    long long n = std::llround(ratio);
    double remainder = t - static_cast<double>(n) * dt;
    if (std::fabs(remainder) > 1e-9 * std::max(t, dt)) {
        n = static_cast<long long>(ratio);
        remainder = t - static_cast<double>(n) * dt;
    } else {
        remainder = 0.0;
    }

    const double lambda = dt / (f.spec.dx * f.spec.dx);
    if (lambda > 1.0 + 1e-12)
        throw std::invalid_argument("heat_semigroup: stability bound lambda = dt/dx^2 <= 1 violated");

    std::vector<double> cur = f.values;
    std::vector<double> next(cur.size());
    for (long long k = 0; k < n; ++k) {
        heat_step_into(cur, next, lambda);
        cur.swap(next);
    }
    if (remainder > 0.0) {
        heat_step_into(cur, next, remainder / (f.spec.dx * f.spec.dx));
        cur.swap(next);
    }
    return GridFunction(f.spec, std::move(cur));
}

GridFunction positive_part(const GridFunction& f) {
    GridFunction out(f.spec, 0.0);
    for (int j = 0; j < f.size(); ++j) out[j] = std::max(f[j], 0.0);
    return out;
}

GridFunction negative_part(const GridFunction& f) {
    GridFunction out(f.spec, 0.0);
    for (int j = 0; j < f.size(); ++j) out[j] = std::max(-f[j], 0.0);
    return out;
}

double l1_distance(const GridFunction& f, const GridFunction& g) {
    detail::require_same_spec(f, g, "l1_distance");
    const size_t n = f.values.size();
    std::vector<double> diff(n);
    for (size_t j = 0; j < n; ++j) diff[j] = std::fabs(f.values[j] - g.values[j]);
    return f.spec.dx * detail::compensated_sum(diff.data(), n);
}

}  // namespace sbm
