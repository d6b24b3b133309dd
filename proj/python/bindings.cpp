// Python bindings: thin wrappers that move fields in and out as numpy arrays
// of shape (N+1, M+1), k along axis 0.

#include "stockpile/asymptotics.hpp"
#include "stockpile/config.hpp"
#include "stockpile/manifest.hpp"
#include "stockpile/policy.hpp"
#include "stockpile/solver.hpp"
#include "stockpile/solver1d.hpp"
#include "stockpile/trajectory.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>

namespace py = pybind11;
using namespace stockpile;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Field2D& f) {
    Array a({f.nk(), f.nz()});
    std::memcpy(a.mutable_data(), f.values().data(), f.values().size() * sizeof(double));
    return a;
}

Field2D from_numpy(const Array& a) {
    if (a.ndim() != 2) throw py::value_error("expected a 2D array of shape (N+1, M+1)");
    Field2D f(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::memcpy(f.values().data(), a.data(), f.values().size() * sizeof(double));
    return f;
}

Grid2D grid_of(const ModelParams& m, const Array& a) {
    if (a.ndim() != 2) throw py::value_error("expected a 2D array of shape (N+1, M+1)");
    return Grid2D::make(m, static_cast<int>(a.shape(0)) - 1, static_cast<int>(a.shape(1)) - 1);
}

FieldPair pair_of(const Array& U, const Array& P) {
    FieldPair f{from_numpy(U), from_numpy(P)};
    if (f.U.nk() != f.P.nk() || f.U.nz() != f.P.nz()) throw py::value_error("U and P shapes differ");
    return f;
}

py::dict solve(const ModelParams& m, int N, int M, double dt, long max_iters, double tol, int threads,
               std::optional<Array> U0, std::optional<Array> P0) {
    const Grid2D g = Grid2D::make(m, N, M);
    FieldPair init = default_init(m, g);
    if (U0 || P0) {
        if (!U0 || !P0) throw py::value_error("give both U0 and P0 or neither");
        init = pair_of(*U0, *P0);
    }
    SolveSettings s;
    s.dt = dt;
    s.max_iters = max_iters;
    s.tol_residual = tol;
    s.threads = threads;
    Solution sol;
    {
        py::gil_scoped_release release;
        sol = solve_stationary(m, g, std::move(init), s);
    }
    py::dict out;
    out["U"] = to_numpy(sol.fields.U);
    out["P"] = to_numpy(sol.fields.P);
    out["converged"] = sol.report.converged;
    out["iterations"] = sol.report.iterations;
    out["residual"] = sol.report.residual();
    return out;
}

py::dict policy(const ModelParams& m, const Array& U, const Array& P) {
    const Grid2D g = grid_of(m, U);
    const PolicyFields pol = extract_policy(pair_of(U, P), g, m);
    std::vector<double> sz, sa;
    for (const ShockPoint& s : pol.shock_locus) {
        sz.push_back(s.z);
        sa.push_back(s.amplitude);
    }
    py::dict out;
    out["q_star"] = to_numpy(pol.q_star);
    out["drift_k"] = to_numpy(pol.drift_k);
    out["drift_z"] = to_numpy(pol.drift_z);
    out["shock_z"] = sz;
    out["shock_amplitude"] = sa;
    return out;
}

Array simulate(const ModelParams& m, const Array& U, const Array& P, double k0, double z0, double T, double dt,
               std::optional<std::uint64_t> seed) {
    const Grid2D g = grid_of(m, U);
    const FieldPair f = pair_of(U, P);
    const FeedbackFields fb = make_feedback(extract_policy(f, g, m), f, g);
    SimulationSettings s;
    s.T = T;
    s.dt = dt;
    s.noise_seed = seed;
    const Trajectory tr = simulate_trajectory(fb, m, k0, z0, s);
    Array out({static_cast<py::ssize_t>(tr.samples.size()), py::ssize_t{5}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t n = 0; n < tr.samples.size(); ++n) {
        const TrajectorySample& x = tr.samples[n];
        v(n, 0) = x.t;
        v(n, 1) = x.k;
        v(n, 2) = x.z;
        v(n, 3) = x.p;
        v(n, 4) = x.q;
    }
    return out;
}

py::dict asymptotics(const ModelParams& m, double z) {
    const AsymptoticData a = boundary_asymptotics(m, z);
    const SmoothAnsatzReport s = smooth_ansatz_inconsistency(m, z);
    py::dict out;
    out["V0"] = a.V0;
    out["p0"] = a.p0;
    out["lambda_ratio"] = a.lambda_ratio;
    out["x_plus"] = a.x_plus;
    out["x_minus"] = a.x_minus;
    out["beta"] = a.beta;
    out["gamma"] = a.gamma;
    out["exponent"] = a.exponent;
    out["uniqueness_condition"] = a.uniqueness_condition;
    out["feasible"] = a.feasible;
    out["note"] = a.note;
    out["smooth_ansatz_residual"] = s.residual;
    return out;
}

py::dict solve_constant_fringe(const ModelParams& m, double z, int N, double dt, long max_iters, double tol) {
    const Grid1D g = Grid1D::make(m, N);
    SolveSettings s;
    s.dt = dt;
    s.max_iters = max_iters;
    s.tol_residual = tol;
    Solution1D sol;
    {
        py::gil_scoped_release release;
        sol = solve_1d(m, z, g, default_init_1d(m, g), s);
    }
    std::vector<double> k(g.size());
    for (int i = 0; i <= g.N; ++i) k[i] = g.k(i);
    py::dict out;
    out["k"] = k;
    out["U"] = sol.fields.U;
    out["P"] = sol.fields.P;
    out["converged"] = sol.report.converged;
    out["iterations"] = sol.report.iterations;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Stationary cartel / fringe / storage market solver";
    mod.attr("__version__") = version_string();

    py::register_exception<ContractViolation>(mod, "ContractViolation", PyExc_ValueError);
    py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
    py::register_exception<DivergenceError>(mod, "DivergenceError", PyExc_RuntimeError);

    py::class_<ModelParams>(mod, "ModelParams")
        .def(py::init<>())
        .def_static("baseline", &ModelParams::baseline)
        .def_static("appendix", &ModelParams::appendix)
        .def_readwrite("r", &ModelParams::r)
        .def_readwrite("epsilon", &ModelParams::epsilon)
        .def_readwrite("alpha", &ModelParams::alpha)
        .def_readwrite("q_circ", &ModelParams::q_circ)
        .def_readwrite("c", &ModelParams::c)
        .def_readwrite("kappa", &ModelParams::kappa)
        .def_readwrite("lambda_b", &ModelParams::lambda_b)
        .def_readwrite("mu_b", &ModelParams::mu_b)
        .def_readwrite("a_f", &ModelParams::a_f)
        .def_readwrite("nu_z", &ModelParams::nu_z)
        .def_readwrite("k_min", &ModelParams::k_min)
        .def_readwrite("k_max", &ModelParams::k_max)
        .def_readwrite("z_min", &ModelParams::z_min)
        .def_readwrite("z_max", &ModelParams::z_max)
        .def_readwrite("g_coeff", &ModelParams::g_coeff)
        .def_readwrite("g_exponent", &ModelParams::g_exponent)
        .def_readwrite("b_tilde_width", &ModelParams::b_tilde_width)
        .def_readwrite("b_tilde_amp", &ModelParams::b_tilde_amp)
        .def("validate", &ModelParams::validate);

    mod.def(
        "load_config",
        [](const std::string& path) {
            const RunConfig c = load_config(path);
            py::dict d;
            d["params"] = c.params;
            d["N"] = c.N;
            d["M"] = c.M;
            d["dt"] = c.solve.dt;
            d["max_iters"] = c.solve.max_iters;
            d["tol_residual"] = c.solve.tol_residual;
            d["seed"] = c.seed;
            d["text"] = to_text(c);
            return d;
        },
        py::arg("path"));

    mod.def("solve", &solve, py::arg("params"), py::arg("N"), py::arg("M"), py::arg("dt"),
            py::arg("max_iters") = 1'000'000, py::arg("tol") = 1e-6, py::arg("threads") = 1,
            py::arg("U0") = py::none(), py::arg("P0") = py::none());
    mod.def("policy", &policy, py::arg("params"), py::arg("U"), py::arg("P"));
    mod.def("simulate", &simulate, py::arg("params"), py::arg("U"), py::arg("P"), py::arg("k0"), py::arg("z0"),
            py::arg("T"), py::arg("dt") = 1e-3, py::arg("seed") = py::none(),
            "Rows of (t, k, z, p, q); a seed adds fringe noise.");
    mod.def("asymptotics", &asymptotics, py::arg("params"), py::arg("z"));
    mod.def("solve_constant_fringe", &solve_constant_fringe, py::arg("params"), py::arg("z"), py::arg("N"),
            py::arg("dt"), py::arg("max_iters") = 3'000'000, py::arg("tol") = 1e-8);
}
