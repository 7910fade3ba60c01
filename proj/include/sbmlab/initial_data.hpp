#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sbmlab/grid.hpp"

namespace sbm {

// Closed-form initial data / test function descriptors. A descriptor is a sum
// of terms; sampling evaluates each analytic term at the cell centers x_j and
// adds explicit tables verbatim.

struct ConstantTerm {
    double value = 0.0;
};

/// amplitude * exp(-(x - center)^2 / (2 width^2)); mass = amplitude * width * sqrt(2 pi).
struct GaussianBumpTerm {
    double amplitude = 1.0;
    double center = 0.0;
    double width = 1.0;

    double mass() const;
    static GaussianBumpTerm with_mass(double mass, double center, double width);
};

/// amplitude * exp(1/(x^2 - n^2)) on (-n, n), zero outside. Smooth and compactly supported.
struct SmoothCutoffBumpTerm {
    double amplitude = 1.0;
    double radius = 1.0;  // n
};

/// amplitude * sin(k pi x / L): the k-th sine mode of the torus [-L, L).
struct SineTerm {
    double amplitude = 1.0;
    int wavenumber = 1;
};

/// Explicit per-cell values; length must equal the grid's N at sampling time.
struct TableTerm {
    std::vector<double> values;
};

using InitialTerm = std::variant<ConstantTerm, GaussianBumpTerm, SmoothCutoffBumpTerm, SineTerm, TableTerm>;

struct InitialData {
    std::vector<InitialTerm> terms;

    InitialData() = default;
    explicit InitialData(InitialTerm term) : terms{std::move(term)} {}

    InitialData& operator+=(const InitialData& other);
    friend InitialData operator+(InitialData a, const InitialData& b) { return a += b; }

    bool empty() const { return terms.empty(); }

    /// True when every term decays (bumps / tables); constants and sines make
    /// the descriptor bounded-type instead. Used to pick which longtime
    /// statements apply.
    bool integrable_like() const;

    std::string describe() const;
};

InitialData constant_data(double c);
InitialData gaussian_bump(double amplitude, double center, double width);
InitialData gaussian_bump_with_mass(double mass, double center, double width);
InitialData smooth_cutoff_bump(double amplitude, double radius);
InitialData sine_data(double amplitude, int wavenumber);
InitialData table_data(std::vector<double> values);

/// values[j] = d(x_j), x_j = -L + j dx. Throws on table length mismatch.
GridFunction sample(const GridSpec& spec, const InitialData& d);

}  // namespace sbm
