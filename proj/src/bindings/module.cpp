#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sbmlab/config.hpp"
#include "sbmlab/duality.hpp"
#include "sbmlab/experiments.hpp"
#include "sbmlab/grid.hpp"
#include "sbmlab/initial_data.hpp"
#include "sbmlab/noise.hpp"
#include "sbmlab/runner.hpp"
#include "sbmlab/spde.hpp"
#include "sbmlab/stats.hpp"

namespace py = pybind11;
using namespace sbm;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return std::vector<double>(a.data(), a.data() + a.size());
}

GridFunction make_grid_function(const GridSpec& spec,
                                const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return GridFunction(spec, from_array(a));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "grid, noise, SPDE steppers and duality estimators of the sbmlab simulation lab";

    py::class_<GridSpec>(m, "GridSpec")
        .def_readonly("L", &GridSpec::half_width)
        .def_readonly("N", &GridSpec::points)
        .def_readonly("dx", &GridSpec::dx)
        .def("x", &GridSpec::x, py::arg("j"))
        .def("__repr__", [](const GridSpec& g) {
            return "GridSpec(L=" + std::to_string(g.half_width) + ", N=" + std::to_string(g.points) + ")";
        });
    m.def("make_grid", &make_grid, py::arg("L"), py::arg("N"));

    py::class_<GridFunction>(m, "GridFunction")
        .def(py::init(&make_grid_function), py::arg("spec"), py::arg("values"))
        .def_readonly("spec", &GridFunction::spec)
        .def_property_readonly("values", [](const GridFunction& f) { return to_array(f.values); })
        .def("min", &GridFunction::min_value)
        .def("max", &GridFunction::max_value)
        .def("sup_norm", &GridFunction::sup_norm);

    py::class_<InitialData>(m, "InitialData")
        .def("__add__", [](const InitialData& a, const InitialData& b) { return a + b; })
        .def("describe", &InitialData::describe)
        .def("integrable_like", &InitialData::integrable_like);
    m.def("constant", &constant_data, py::arg("c"));
    m.def("gaussian_bump", &gaussian_bump, py::arg("amplitude"), py::arg("center") = 0.0,
          py::arg("width") = 0.5);
    m.def("gaussian_bump_with_mass", &gaussian_bump_with_mass, py::arg("mass"),
          py::arg("center") = 0.0, py::arg("width") = 0.5);
    m.def("smooth_cutoff_bump", &smooth_cutoff_bump, py::arg("amplitude"), py::arg("n"));
    m.def("sine", &sine_data, py::arg("amplitude"), py::arg("k"));
    m.def("table", &table_data, py::arg("values"));
    m.def("parse_descriptor", &parse_descriptor, py::arg("text"));
    m.def("sample", &sample, py::arg("spec"), py::arg("descriptor"));

    m.def("pair", &pair, py::arg("f"), py::arg("g"));
    m.def("total_mass", &total_mass);
    m.def("mean_bar", &mean_bar);
    m.def("heat_kernel", &heat_kernel, py::arg("t"), py::arg("x"));
    m.def("heat_step", py::overload_cast<const GridFunction&, double>(&heat_step), py::arg("f"),
          py::arg("dt"));
    m.def("heat_semigroup", &heat_semigroup, py::arg("f"), py::arg("t"), py::arg("dt"));
    m.def("positive_part", &positive_part);
    m.def("negative_part", &negative_part);

    py::class_<SeedSpec>(m, "SeedSpec")
        .def(py::init([](std::uint64_t base_seed, std::uint64_t stream_id) {
                 return SeedSpec{base_seed, stream_id};
             }),
             py::arg("base_seed"), py::arg("stream_id") = 0)
        .def_readonly("base_seed", &SeedSpec::base_seed)
        .def_readonly("stream_id", &SeedSpec::stream_id);

    py::class_<NoiseGenerator>(m, "NoiseGenerator")
        .def(py::init<SeedSpec>(), py::arg("seed"))
        .def("normals",
             [](NoiseGenerator& g, int n) {
                 std::vector<double> out(static_cast<size_t>(n));
                 g.fill_normals(out.data(), n);
                 return to_array(out);
             },
             py::arg("n"))
        .def("correlated_pair",
             [](NoiseGenerator& g, int n, double rho) {
                 const NoiseIncrement inc = correlated_pair(g, n, rho);
                 return py::make_tuple(to_array(inc.xi), to_array(*inc.xi2));
             },
             py::arg("n"), py::arg("rho"))
        .def_property_readonly("blocks_consumed", &NoiseGenerator::blocks_consumed);
    m.def("generator_version", &generator_version);

    py::class_<SchemeParams>(m, "SchemeParams")
        .def(py::init([](double dt, bool clip) {
                 SchemeParams p;
                 p.dt = dt;
                 p.clip_negative = clip;
                 return p;
             }),
             py::arg("dt"), py::arg("clip") = true)
        .def_readwrite("dt", &SchemeParams::dt)
        .def_readwrite("clip_negative", &SchemeParams::clip_negative)
        .def_readwrite("noise_scale", &SchemeParams::noise_scale)
        .def_readwrite("drift_scale", &SchemeParams::drift_scale)
        .def("lambda_for", &SchemeParams::lambda, py::arg("spec"));

    py::class_<SbmState>(m, "SbmState")
        .def(py::init([](const GridFunction& u1, const GridFunction& u2, double t, double rho) {
                 SbmState s{u1, u2, t, rho};
                 s.validate();
                 return s;
             }),
             py::arg("u1"), py::arg("u2"), py::arg("t") = 0.0, py::arg("rho") = 1.0)
        .def_readonly("u1", &SbmState::u1)
        .def_readonly("u2", &SbmState::u2)
        .def_readonly("t", &SbmState::t)
        .def_readonly("rho", &SbmState::rho)
        .def("xy", [](const SbmState& s) {
            auto [x, y] = xy_view(s);
            return py::make_tuple(x, y);
        });

    py::class_<PamState>(m, "PamState")
        .def(py::init([](const GridFunction& v, double t) {
                 PamState s{v, t};
                 s.validate();
                 return s;
             }),
             py::arg("v"), py::arg("t") = 0.0)
        .def_readonly("v", &PamState::v)
        .def_readonly("t", &PamState::t);

    m.def("step_sbm",
          py::overload_cast<const SbmState&, const SchemeParams&, const NoiseIncrement&>(&step_sbm),
          py::arg("state"), py::arg("params"), py::arg("noise"));
    m.def("step_pam",
          py::overload_cast<const PamState&, const SchemeParams&, const NoiseIncrement&>(&step_pam),
          py::arg("state"), py::arg("params"), py::arg("noise"));

    py::class_<NoiseIncrement>(m, "NoiseIncrement")
        .def_property_readonly("xi", [](const NoiseIncrement& n) { return to_array(n.xi); })
        .def_property_readonly("xi2", [](const NoiseIncrement& n) -> py::object {
            if (!n.xi2) return py::none();
            return to_array(*n.xi2);
        });
    m.def("white_increment", &white_increment, py::arg("gen"), py::arg("n"));
    m.def("correlated_pair", &correlated_pair, py::arg("gen"), py::arg("n"), py::arg("rho"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_property_readonly("series",
                               [](const Trajectory& t) {
                                   py::dict d;
                                   for (const auto& [k, v] : t.series) d[py::str(k)] = to_array(v);
                                   return d;
                               })
        .def_property_readonly("clip_events",
                               [](const Trajectory& t) { return t.stats.clip_events; });

    py::enum_<ObservableTarget>(m, "ObservableTarget")
        .value("U1", ObservableTarget::U1)
        .value("U2", ObservableTarget::U2)
        .value("X", ObservableTarget::X)
        .value("Y", ObservableTarget::Y)
        .value("V", ObservableTarget::V);

    py::class_<ObservableSpec>(m, "ObservableSpec")
        .def(py::init([](std::string name, ObservableTarget target,
                         std::optional<GridFunction> weight) {
                 ObservableSpec o;
                 o.name = std::move(name);
                 o.target = target;
                 o.weight = std::move(weight);
                 return o;
             }),
             py::arg("name"), py::arg("target"), py::arg("weight") = std::nullopt);

    m.def("simulate_sbm", &simulate_sbm, py::arg("initial"), py::arg("params"), py::arg("seed"),
          py::arg("n_steps"), py::arg("checkpoint_steps"), py::arg("observables"),
          py::arg("record_fields") = false);
    m.def("simulate_pam", &simulate_pam, py::arg("initial"), py::arg("params"), py::arg("seed"),
          py::arg("n_steps"), py::arg("checkpoint_steps"), py::arg("observables"),
          py::arg("record_fields") = false);

    py::class_<MCEstimate>(m, "MCEstimate")
        .def_readonly("mean", &MCEstimate::mean)
        .def_readonly("stderr", &MCEstimate::stderr_mean)
        .def_readonly("n", &MCEstimate::n);

    py::class_<DualityConfig>(m, "DualityConfig")
        .def(py::init([](const GridSpec& grid, const GridFunction& u1_0, const GridFunction& u2_0,
                         const GridFunction& phi, double T, int n_steps, std::uint64_t base_seed,
                         int replicas, int workers, double z_max) {
                 DualityConfig c;
                 c.grid = grid;
                 c.u1_0 = u1_0;
                 c.u2_0 = u2_0;
                 c.phi = phi;
                 c.horizon = T;
                 c.n_steps = n_steps;
                 c.scheme.dt = n_steps > 0 ? T / n_steps : 0.0;
                 c.base_seed = base_seed;
                 c.replicas = replicas;
                 c.workers = workers;
                 c.z_max = z_max;
                 return c;
             }),
             py::arg("grid"), py::arg("u1_0"), py::arg("u2_0"), py::arg("phi"), py::arg("T"),
             py::arg("n_steps"), py::arg("base_seed") = 1, py::arg("replicas") = 1000,
             py::arg("workers") = 1, py::arg("z_max") = 4.0);

    py::class_<EnsembleResult>(m, "EnsembleResult")
        .def_readonly("estimate", &EnsembleResult::estimate)
        .def_property_readonly("samples",
                               [](const EnsembleResult& r) { return to_array(r.samples); })
        .def_readonly("clip_events", &EnsembleResult::clip_events);

    py::class_<DualityReport>(m, "DualityReport")
        .def_readonly("lhs", &DualityReport::lhs)
        .def_readonly("rhs", &DualityReport::rhs)
        .def_readonly("z", &DualityReport::z)
        .def_readonly("pass_", &DualityReport::pass)
        .def_readonly("note", &DualityReport::note);

    m.def("duality_lhs", &duality_lhs, py::arg("cfg"),
          py::call_guard<py::gil_scoped_release>());
    m.def("duality_rhs", &duality_rhs, py::arg("cfg"),
          py::call_guard<py::gil_scoped_release>());
    m.def("duality_check", &duality_check, py::arg("cfg"),
          py::call_guard<py::gil_scoped_release>());

    m.def("compare", &compare, py::arg("a"), py::arg("b"), py::arg("z_max") = 4.0);
    py::class_<CompareResult>(m, "CompareResult")
        .def_readonly("z", &CompareResult::z)
        .def_readonly("pass_", &CompareResult::pass)
        .def_readonly("note", &CompareResult::note);

    m.def(
        "run_config",
        [](const std::string& text, const std::string& out_dir) {
            const ParseResult parsed = parse_config(text);
            if (!parsed.ok()) {
                std::string msg = "config errors:";
                for (const auto& e : parsed.errors)
                    msg += "\n  line " + std::to_string(e.line) + ": " + e.message;
                throw std::invalid_argument(msg);
            }
            RunOptions opts;
            opts.out_dir = out_dir;
            return run_experiment(*parsed.config, opts);
        },
        py::arg("config_text"), py::arg("out_dir"),
        "parse and run an experiment config; returns the exit code (0 pass, 1 verdict failed)");
    m.def("list_experiments", &list_experiments);
    m.def("describe_experiment", &describe_experiment, py::arg("kind"));

    m.attr("__version__") = "0.1.0";
}
