// Python bindings for the phasecur core. Fields come back as NumPy arrays
// shaped (n1, n2, n3) or (3, n1, n2, n3).

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "phasecur/currents.hpp"
#include "phasecur/distributions.hpp"
#include "phasecur/kinetic.hpp"
#include "phasecur/scenario.hpp"

namespace py = pybind11;
using namespace phasecur;

namespace {

py::array_t<cplx> scalar_array(const Grid3& g, const std::vector<cplx>& v) {
    py::array_t<cplx> out({g.n(0), g.n(1), g.n(2)});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<cplx> vector_array(const VectorField& f) {
    const Grid3& g = f.grid;
    py::array_t<cplx> out({std::size_t{3}, g.n(0), g.n(1), g.n(2)});
    cplx* dst = out.mutable_data();
    for (int a = 0; a < 3; ++a) dst = std::copy(f.components[a].begin(), f.components[a].end(), dst);
    return out;
}

py::dict report_dict(const AdmissibilityReport& r) {
    py::dict d;
    auto cond = [](const ConditionResult& c) { return py::make_tuple(c.pass, c.deviation); };
    d["kernel"] = r.kernel_id;
    d["2.2a"] = cond(r.cond_2_2a);
    d["2.2b"] = cond(r.cond_2_2b);
    d["reality"] = cond(r.reality);
    d["divergence_free"] = cond(r.divergence_free);
    d["b_fit"] = r.fitted_b;
    d["b_fit_imag_norm"] = r.fitted_b_imag;
    d["fit_residual"] = r.fit_residual;
    d["mean_momentum_term"] = r.mean_momentum_term;
    d["gradient_analytic"] = r.gradient_analytic;
    return d;
}

py::dict slice_dict(const PhaseSpaceSlice& f) {
    py::dict d;
    py::list q_axes, p_axes;
    for (int a = 0; a < 3; ++a) {
        std::vector<double> qa, pa;
        for (auto i : f.q_index[a]) qa.push_back(f.q_grid.coord(a, i));
        for (auto i : f.p_index[a]) pa.push_back(f.p_grid.coord(a, i));
        q_axes.append(qa);
        p_axes.append(pa);
    }
    std::vector<std::size_t> shape;
    for (int a = 0; a < 3; ++a) shape.push_back(f.q_index[a].size());
    for (int a = 0; a < 3; ++a) shape.push_back(f.p_index[a].size());
    py::array_t<cplx> values(shape);
    std::copy(f.values.begin(), f.values.end(), values.mutable_data());
    d["q_axes"] = q_axes;
    d["p_axes"] = p_axes;
    d["values"] = values;
    d["kernel"] = f.kernel_id;
    d["masked_fraction"] = f.masked_fraction;
    return d;
}

Selection point_selection(const Wavefunction& wf, const std::optional<Vec3>& q) {
    return q ? Selection::at_q(wf.grid(), *q) : Selection::all();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Generalized phase-space distributions and their probability currents";

    static py::exception<Error> error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    py::class_<PhysicalConstants>(m, "PhysicalConstants")
        .def(py::init([](double hbar, double mass) { return PhysicalConstants{hbar, mass}; }), py::arg("hbar") = 1.0,
             py::arg("mass") = 1.0)
        .def_readwrite("hbar", &PhysicalConstants::hbar)
        .def_readwrite("mass", &PhysicalConstants::mass);

    py::class_<Grid3>(m, "Grid3")
        .def(py::init([](std::size_t n, double L) { return Grid3::cubic(n, L); }), py::arg("n"), py::arg("L"))
        .def(py::init<Index3, Vec3>(), py::arg("n"), py::arg("L"))
        .def_property_readonly("dims", &Grid3::dims)
        .def_property_readonly("lengths", &Grid3::lengths)
        .def("coord", &Grid3::coord)
        .def("axis", [](const Grid3& g, int a) {
            std::vector<double> x(g.n(a));
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = g.coord(a, i);
            return x;
        });

    py::class_<StateSpec>(m, "StateSpec")
        .def_static("gaussian", &StateSpec::gaussian, py::arg("sigma0") = 1.0, py::arg("q0") = Vec3{},
                    py::arg("p0") = Vec3{})
        .def_static("ho_axis", &StateSpec::ho_axis, py::arg("axis"), py::arg("coefficients"), py::arg("omega") = 1.0)
        .def_static(
            "ho",
            [](const std::vector<std::pair<std::array<int, 3>, cplx>>& terms, double omega) {
                std::vector<HoTerm> t;
                for (const auto& [n, c] : terms) t.push_back({n, c});
                return StateSpec::ho(std::move(t), omega);
            },
            py::arg("terms"), py::arg("omega") = 1.0)
        .def_property_readonly("kind", [](const StateSpec& s) { return to_string(s.kind); });

    py::class_<Wavefunction>(m, "Wavefunction")
        .def_property_readonly("grid", &Wavefunction::grid)
        .def_readonly("time", &Wavefunction::time)
        .def_property_readonly("psi", [](const Wavefunction& w) { return scalar_array(w.grid(), w.psi.values); });

    py::class_<RealizeOptions>(m, "RealizeOptions")
        .def(py::init([](double leak, double norm) { return RealizeOptions{leak, norm}; }), py::arg("leak_tol") = 1e-10,
             py::arg("norm_tol") = 1e-10);
    m.def("realize", &realize, py::arg("spec"), py::arg("t"), py::arg("grid"), py::arg("constants") = PhysicalConstants{},
          py::arg("options") = RealizeOptions{});

    m.def("density", [](const Wavefunction& w) { return scalar_array(w.grid(), density(w).values); });
    m.def("schrodinger_current", [](const Wavefunction& w) { return vector_array(schrodinger_current(w)); });
    m.def("mean_momentum", &mean_momentum);
    m.def("mean_kinetic", &mean_kinetic);

    py::class_<Kernel>(m, "Kernel")
        .def_readonly("id", &Kernel::id)
        .def_readonly("distribution_valued", &Kernel::distribution_valued)
        .def("__call__", [](const Kernel& k, const Vec3& theta, const Vec3& tau) { return k(theta, tau); });

    m.def(
        "builtin",
        [](const std::string& name, std::optional<Vec3> b, std::optional<double> c, std::optional<double> k,
           std::optional<double> sigma0, const PhysicalConstants& constants) {
            return builtin(name, KernelParams{b, c, k, sigma0}, constants);
        },
        py::arg("name"), py::arg("b") = py::none(), py::arg("c") = py::none(), py::arg("k") = py::none(),
        py::arg("sigma0") = py::none(), py::arg("constants") = PhysicalConstants{});
    m.def("builtin_names", &builtin_names);
    m.def("dbb_kernel", &dbb_kernel, py::arg("psi"), py::arg("b"), py::arg("eps_den") = 1e-10);
    m.def("tau_gradient0", [](const Kernel& k, const Vec3& theta) { return tau_gradient0(k, theta).value; });
    m.def(
        "check_admissibility",
        [](const Kernel& k, double tol, std::uint64_t seed) {
            return report_dict(check_admissibility(k, default_theta_samples(7 + seed), default_tau_samples(11 + seed), tol));
        },
        py::arg("kernel"), py::arg("tol") = 1e-6, py::arg("seed") = 0);

    m.def("current_closed_form", [](const Wavefunction& w, const Kernel& k) { return vector_array(current_closed_form(w, k).j); });
    m.def("spin_like_current",
          [](const Wavefunction& w, double lambda, const Vec3& a) { return vector_array(spin_like_current(w, lambda, a).j); },
          py::arg("psi"), py::arg("lam"), py::arg("a_prime"));
    m.def("continuity_residual", &continuity_residual, py::arg("spec"), py::arg("lam"), py::arg("a_prime"), py::arg("t"),
          py::arg("dt"), py::arg("grid"), py::arg("constants") = PhysicalConstants{});

    m.def(
        "wigner_transform",
        [](const Wavefunction& w, const Grid3& pg, std::optional<Vec3> q) {
            return slice_dict(wigner_transform(w, pg, point_selection(w, q)));
        },
        py::arg("psi"), py::arg("p_grid"), py::arg("q") = py::none());
    m.def(
        "generalized_distribution",
        [](const Wavefunction& w, const Kernel& k, const Grid3& pg, std::optional<Vec3> q) {
            return slice_dict(generalized_distribution(w, k, pg, point_selection(w, q)));
        },
        py::arg("psi"), py::arg("kernel"), py::arg("p_grid"), py::arg("q") = py::none());
    m.def(
        "moment_current",
        [](const Wavefunction& w, const Kernel& k, const Grid3& pg, const Vec3& q, double p_leak_tol) {
            const PhaseSpaceSlice f = generalized_distribution(w, k, pg, Selection::at_q(w.grid(), q));
            MomentOptions o;
            o.p_leak_tol = p_leak_tol;
            o.mass = w.constants.mass;
            return current_from_moment(f, o).at(q);
        },
        py::arg("psi"), py::arg("kernel"), py::arg("p_grid"), py::arg("q"), py::arg("p_leak_tol") = 1e-10);
    m.def("dbb_moment_current", [](const Wavefunction& w, const Vec3& b) {
        return vector_array(current_from_moment(dbb_field(w, b), w.constants).j);
    });
    m.def("dbb_kernel_eval", &dbb_kernel_eval, py::arg("psi"), py::arg("b"), py::arg("theta"), py::arg("tau"),
          py::arg("eps_den") = 1e-10);

    m.def("local_kinetic_energy",
          [](const Wavefunction& w, const Vec3& b) { return scalar_array(w.grid(), local_kinetic_energy(w, b).K.values); });
    m.def("mean_kinetic_check", [](const Wavefunction& w, const Vec3& b) {
        const MeanKineticCheck c = mean_kinetic_check(w, b);
        return py::make_tuple(c.integral, c.quantum, c.difference);
    });

    m.def(
        "run_scenario",
        [](const std::string& config_json, const std::optional<std::filesystem::path>& out) {
            ScenarioConfig c = parse_config(nlohmann::json::parse(config_json));
            if (out) c.output_dir = *out;
            const ScenarioResult r = run_scenario(c);
            return py::make_tuple(r.all_pass(), summary_json(r).dump());
        },
        py::arg("config_json"), py::arg("out") = py::none(),
        "Runs a scenario from its JSON text; returns (all_pass, summary JSON text).");
}
