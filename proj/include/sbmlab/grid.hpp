#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbm {

/// Uniform periodic grid on the torus [-L, L) with N cells of width dx = 2L/N.
struct GridSpec {
    double half_width = 0.0;  // L
    int points = 0;           // N
    double dx = 0.0;          // 2L/N

    double x(int j) const { return -half_width + j * dx; }
    double length() const { return 2.0 * half_width; }

    bool operator==(const GridSpec&) const = default;
};

/// N >= 4 and even, L > 0. Throws std::invalid_argument otherwise.
GridSpec make_grid(double half_width, int points);

/// Real values on a uniform periodic grid. Values are plain doubles; all
/// operations treat the function as the step function that is constant on
/// each cell, so <f,g> is the Riemann sum dx * sum_j f_j g_j.
struct GridFunction {
    GridSpec spec;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(GridSpec s, std::vector<double> v);
    GridFunction(GridSpec s, double fill);

    int size() const { return static_cast<int>(values.size()); }
    double& operator[](int j) { return values[static_cast<size_t>(j)]; }
    double operator[](int j) const { return values[static_cast<size_t>(j)]; }

    bool all_finite() const;
    double min_value() const;
    double max_value() const;
    double sup_norm() const;
};

GridFunction constant(const GridSpec& spec, double c);

/// <f,g> = dx * sum_j f_j g_j (compensated summation). Specs must match.
double pair(const GridFunction& f, const GridFunction& g);

/// <f, 1>
double total_mass(const GridFunction& f);

/// <f, 1> / (2L) — the grid average; the torus analogue of the mean on R.
double mean_bar(const GridFunction& f);

/// Gaussian heat kernel p_t(x) = (2 pi t)^{-1/2} exp(-x^2 / 2t), t > 0.
double heat_kernel(double t, double x);

/// One explicit step of du/dt = (1/2) Laplacian u with the 3-point periodic
/// stencil: u'_j = (1-lambda) u_j + (lambda/2)(u_{j-1} + u_{j+1}) where
/// lambda = dt/dx^2. Requires lambda <= 1 (convex combination; discrete
/// maximum principle and exact mass telescoping).
GridFunction heat_step(const GridFunction& f, double dt);

/// Low-level kernel used by heat_step and the stochastic steppers: writes
/// the stepped values of `in` into `out` (distinct buffers).
void heat_step_into(const std::vector<double>& in, std::vector<double>& out, double lambda);

/// Discrete semigroup S_t f realized as repeated heat_step calls: floor(t/dt)
/// full steps plus one shortened step for the remainder. When t is an exact
/// multiple of dt this is exactly t/dt steps, so S_{s+t} = S_t S_s holds on
/// the step grid.
GridFunction heat_semigroup(const GridFunction& f, double t, double dt);

GridFunction positive_part(const GridFunction& f);
GridFunction negative_part(const GridFunction& f);

/// <|f - g|, 1>
double l1_distance(const GridFunction& f, const GridFunction& g);

namespace detail {
/// Neumaier compensated sum of v[0..n).
double compensated_sum(const double* v, size_t n);
void require_same_spec(const GridFunction& f, const GridFunction& g, const char* op);
}  // namespace detail

}  // namespace sbm
