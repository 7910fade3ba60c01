#include "sbmlab/initial_data.hpp"

#include <cmath>
#include <sstream>

namespace sbm {

double GaussianBumpTerm::mass() const { return amplitude * width * std::sqrt(2.0 * M_PI); }

GaussianBumpTerm GaussianBumpTerm::with_mass(double mass, double center, double width) {
    GaussianBumpTerm t;
    t.width = width;
    t.center = center;
    t.amplitude = mass / (width * std::sqrt(2.0 * M_PI));
    return t;
}

InitialData& InitialData::operator+=(const InitialData& other) {
    terms.insert(terms.end(), other.terms.begin(), other.terms.end());
    return *this;
}

bool InitialData::integrable_like() const {
    for (const auto& term : terms) {
        if (std::holds_alternative<ConstantTerm>(term) || std::holds_alternative<SineTerm>(term))
            return false;
    }
    return true;  // vacuously for the empty (zero) descriptor
}

std::string InitialData::describe() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& term : terms) {
        if (!first) os << " + ";
        first = false;
        std::visit(
            [&](const auto& t) {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, ConstantTerm>) {
                    os << "constant " << t.value;
                } else if constexpr (std::is_same_v<T, GaussianBumpTerm>) {
                    os << "gaussian_bump amplitude=" << t.amplitude << " center=" << t.center
                       << " width=" << t.width;
                } else if constexpr (std::is_same_v<T, SmoothCutoffBumpTerm>) {
                    os << "smooth_cutoff_bump amplitude=" << t.amplitude << " n=" << t.radius;
                } else if constexpr (std::is_same_v<T, SineTerm>) {
                    os << "sine amplitude=" << t.amplitude << " k=" << t.wavenumber;
                } else {
                    os << "table[" << t.values.size() << "]";
                }
            },
            term);
    }
    if (first) os << "(empty)";
    return os.str();
}

InitialData constant_data(double c) { return InitialData(ConstantTerm{c}); }

InitialData gaussian_bump(double amplitude, double center, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be positive");
    return InitialData(GaussianBumpTerm{amplitude, center, width});
}

InitialData gaussian_bump_with_mass(double mass, double center, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be positive");
    return InitialData(GaussianBumpTerm::with_mass(mass, center, width));
}

InitialData smooth_cutoff_bump(double amplitude, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("smooth_cutoff_bump: n must be positive");
    return InitialData(SmoothCutoffBumpTerm{amplitude, radius});
}

InitialData sine_data(double amplitude, int wavenumber) {
    if (wavenumber < 1) throw std::invalid_argument("sine: wavenumber must be >= 1");
    return InitialData(SineTerm{amplitude, wavenumber});
}

InitialData table_data(std::vector<double> values) {
    return InitialData(TableTerm{std::move(values)});
}

namespace {

double eval_analytic(const InitialTerm& term, double x, const GridSpec& spec) {
    return std::visit(
        [&](const auto& t) -> double {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, ConstantTerm>) {
                return t.value;
            } else if constexpr (std::is_same_v<T, GaussianBumpTerm>) {
                const double z = (x - t.center) / t.width;
                return t.amplitude * std::exp(-0.5 * z * z);
            } else if constexpr (std::is_same_v<T, SmoothCutoffBumpTerm>) {
                if (std::fabs(x) >= t.radius) return 0.0;
                return t.amplitude * std::exp(1.0 / (x * x - t.radius * t.radius));
            } else if constexpr (std::is_same_v<T, SineTerm>) {
                return t.amplitude * std::sin(t.wavenumber * M_PI * x / spec.half_width);
            } else {
                return 0.0;  // tables handled by index
            }
        },
        term);
}

}  // namespace

GridFunction sample(const GridSpec& spec, const InitialData& d) {
    GridFunction out(spec, 0.0);
    for (const auto& term : d.terms) {
        if (const auto* table = std::get_if<TableTerm>(&term)) {
            if (static_cast<int>(table->values.size()) != spec.points)
                throw std::invalid_argument("sample: table length does not match grid N");
            for (int j = 0; j < spec.points; ++j) out[j] += table->values[static_cast<size_t>(j)];
        } else {
            for (int j = 0; j < spec.points; ++j) out[j] += eval_analytic(term, spec.x(j), spec);
        }
    }
    if (!out.all_finite()) throw std::invalid_argument("sample: descriptor produced non-finite values");
    return out;
}

}  // namespace sbm
