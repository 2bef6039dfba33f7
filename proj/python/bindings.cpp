#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "sdmp/errors.hpp"
#include "sdmp/forward.hpp"
#include "sdmp/harness.hpp"
#include "sdmp/lq.hpp"
#include "sdmp/noise.hpp"
#include "sdmp/parallel.hpp"
#include "sdmp/problems.hpp"

namespace py = pybind11;
using namespace sdmp;

namespace {

py::array_t<double> to_array(const PathMatrix& m) {
    py::array_t<double> out({m.n_paths(), m.width()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

py::dict run(const std::string& config_json, const std::string& out_dir) {
    const ExperimentConfig config = parse_config(config_json);
    RunResult r;
    {
        py::gil_scoped_release release;
        r = run_experiment(config, out_dir);
    }
    py::list checks;
    for (const auto& c : r.checks) checks.append(py::make_tuple(c.name, c.passed, c.detail));
    py::dict d;
    d["checks"] = checks;
    d["files"] = r.files;
    d["summary"] = r.summary;
    d["passed"] = r.passed();
    return d;
}

py::dict simulate(const std::string& problem, int m, std::uint64_t seed, std::size_t paths,
                  double control) {
    const ProblemSpec spec = make_named_problem(problem, m);
    const NoiseEnsemble noise(spec.grid, seed, paths);
    const ControlPath u = ControlPath::constant(spec, control);
    py::dict d;
    d["t0"] = spec.grid.time(-m);
    d["dt"] = spec.grid.dt();
    d["states"] = to_array(simulate_state(spec, u, noise));
    const CostEstimate J = evaluate_cost(spec, u, noise);
    d["cost"] = py::make_tuple(J.mean, J.std_error);
    return d;
}

py::dict solve(const std::string& problem, int m, std::uint64_t seed, std::size_t paths) {
    const LQProblem prob =
        problem == "lq-no-delay" ? LQProblem::no_delay_reduction() : LQProblem::benchmark();
    const ProblemSpec spec = lq_problem_spec(prob, m);
    const NoiseEnsemble noise(spec.grid, seed, paths);
    std::optional<LQSolution> result;
    {
        py::gil_scoped_release release;
        result.emplace(solve_lq(prob, spec, noise));
    }
    const LQSolution& sol = *result;
    py::dict d;
    d["converged"] = sol.converged;
    d["iterations"] = sol.iterations;
    d["cost"] = py::make_tuple(sol.cost.mean, sol.cost.std_error);
    d["w_changes"] = sol.w_changes;
    d["states"] = to_array(sol.states);
    d["p"] = to_array(sol.first.p);
    return d;
}

}  // namespace

PYBIND11_MODULE(_sdmp, mod) {
    mod.doc() = "Stochastic delay maximum principle toolkit";
    mod.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(mod, "DomainError", PyExc_ValueError);

    mod.def("problem_names", &problem_names);
    mod.def("experiment_names", &experiment_names);
    mod.def("set_workers", &parallel::set_workers, py::arg("workers"));
    mod.def("counter_normal", &counter_normal, py::arg("seed"), py::arg("path"), py::arg("index"));
    mod.def(
        "normalize_config", [](const std::string& j) { return serialize_config(parse_config(j)); },
        py::arg("config_json"), "Canonical JSON with every field filled in.");
    mod.def(
        "config_hash", [](const std::string& j) { return config_hash(parse_config(j)); },
        py::arg("config_json"));
    mod.def("apply_override", [](const std::string& j, const std::string& a) { return apply_override(j, a); },
            py::arg("config_json"), py::arg("assignment"));
    mod.def("run", &run, py::arg("config_json"), py::arg("out_dir"),
            "Runs one experiment; returns checks, files and the summary JSON.");
    mod.def("simulate", &simulate, py::arg("problem"), py::arg("m"), py::arg("seed"), py::arg("paths"),
            py::arg("control") = 1.0, "States on nodes -m .. N under a constant control.");
    mod.def("solve_lq", &solve, py::arg("problem") = "lq-benchmark", py::arg("m") = 8,
            py::arg("seed") = 1, py::arg("paths") = 10000);
    mod.def(
        "riccati",
        [](double A1, double B, double C1, double D, double R1, double L, double H, double T, int steps) {
            const RiccatiSolution r = riccati_reference(A1, B, C1, D, R1, L, H, T, steps);
            return py::make_tuple(r.t, r.k);
        },
        py::arg("A1"), py::arg("B"), py::arg("C1"), py::arg("D"), py::arg("R1"), py::arg("L"),
        py::arg("H"), py::arg("T"), py::arg("steps") = 20000);
    mod.def(
        "lq_control_law", [](double u) { return lq_control_law(u, ControlDomain::punctured_unit()); },
        py::arg("u"), "Projection of the unconstrained minimiser onto the punctured unit set.");
}
