#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "relaxbl/harness.hpp"
#include "relaxbl/schemes.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace relaxbl;
using namespace relaxbl::harness;

namespace {

py::array_t<double> to_array(const GridFunction& g) {
  py::array_t<double> out({g.num_points(), g.components()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t j = 0; j < g.num_points(); ++j)
    for (std::size_t c = 0; c < g.components(); ++c) view(j, c) = g(j, c);
  return out;
}

GridFunction from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array (points x components)");
  GridFunction g(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  auto view = a.unchecked<2>();
  for (py::ssize_t j = 0; j < a.shape(0); ++j)
    for (py::ssize_t c = 0; c < a.shape(1); ++c) g(j, c) = view(j, c);
  return g;
}

py::array_t<double> grid_points(const Grid1D& g) {
  py::array_t<double> x(g.num_points);
  auto view = x.mutable_unchecked<1>();
  for (std::size_t j = 0; j < g.num_points; ++j) view(j) = g.x(j);
  return x;
}

py::dict norms_dict(const ErrorNorms& n) { return py::dict("l1"_a = n.l1, "l2"_a = n.l2, "linf"_a = n.linf); }

py::dict summary_dict(const SchemeSummary& s) {
  return py::dict("boundary_error"_a = s.boundary_error, "interior_sup"_a = s.interior_sup,
                  "interface_sup"_a = s.interface_sup, "interface_point"_a = s.interface_point);
}

Scheme parse_scheme(const std::string& s) {
  if (s == "bap") return Scheme::bap;
  if (s == "upwind") return Scheme::upwind;
  throw InvalidArgument("scheme must be 'bap' or 'upwind', got '" + s + "'");
}

std::string scheme_name(Scheme s) { return s == Scheme::bap ? "bap" : "upwind"; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Boundary-aware upwind schemes for hyperbolic relaxation systems";

  auto base = py::register_exception<Error>(m, "RelaxblError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<SingularMatrix>(m, "SingularMatrix", base.ptr());
  py::register_exception<CharacteristicBoundary>(m, "CharacteristicBoundary", base.ptr());
  py::register_exception<ConvergenceFailure>(m, "ConvergenceFailure", base.ptr());
  py::register_exception<DegenerateSign>(m, "DegenerateSign", base.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readonly("example_id", &ExperimentConfig::example_id)
      .def_property_readonly("scheme", [](const ExperimentConfig& c) { return scheme_name(c.scheme); })
      .def_readwrite("left", &ExperimentConfig::left)
      .def_readwrite("right", &ExperimentConfig::right)
      .def_readwrite("nx", &ExperimentConfig::nx)
      .def_readwrite("cfl", &ExperimentConfig::cfl)
      .def_readwrite("epsilon", &ExperimentConfig::epsilon)
      .def_readwrite("p_exponent", &ExperimentConfig::p_exponent)
      .def_readwrite("t_final", &ExperimentConfig::t_final)
      .def_readwrite("dt", &ExperimentConfig::dt)
      .def_readwrite("output_times", &ExperimentConfig::output_times)
      .def_readwrite("h_fine", &ExperimentConfig::h_fine)
      .def_property_readonly("reference", [](const ExperimentConfig& c) { return to_string(c.reference); })
      .def("validate", &ExperimentConfig::validate)
      .def("__repr__", [](const ExperimentConfig& c) {
        return "<ExperimentConfig example=" + (c.example_id.empty() ? std::string("custom") : c.example_id) +
               " scheme=" + scheme_name(c.scheme) + ">";
      });

  m.def("example_config", &example_config, "id"_a, "Defaults of a registered example.");
  m.def("config_from_json", &config_from_json, "text"_a, "Parse a JSON experiment config.");
  m.def("load_config", &load_config, "path"_a);

  m.def("list_examples", [] {
    py::list out;
    for (const auto& e : example_registry())
      out.append(py::dict("id"_a = e.id, "title"_a = e.title, "paper_parameters"_a = e.paper_parameters,
                          "notes"_a = e.notes, "kind"_a = to_string(e.kind)));
    return out;
  });

  m.def(
      "run",
      [](const ExperimentConfig& cfg, std::optional<std::size_t> nx, const std::string& scheme) {
        const Problem p = build_problem(cfg);
        const std::size_t n = nx.value_or(cfg.nx.at(0));
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg, p, n, parse_scheme(scheme));
        }
        py::list times, values;
        for (const auto& s : r.trajectory.states) {
          times.append(s.time);
          values.append(to_array(s.values));
        }
        return py::dict("x"_a = grid_points(r.grid), "times"_a = times, "values"_a = values,
                        "final"_a = to_array(r.trajectory.final_state().values),
                        "components"_a = r.component_names, "runtime_seconds"_a = r.runtime_seconds);
      },
      "config"_a, "nx"_a = py::none(), "scheme"_a = "bap",
      "Run one scheme; returns grid points, output times and (points x components) arrays.");

  m.def(
      "reference",
      [](const ExperimentConfig& cfg, std::size_t nx, std::optional<double> t) {
        const Problem p = build_problem(cfg);
        const Grid1D g = Grid1D::uniform(cfg.left, cfg.right, nx);
        GridFunction ref;
        {
          py::gil_scoped_release release;
          ref = reference_solution(cfg, p, g, t.value_or(cfg.t_final));
        }
        return to_array(ref);
      },
      "config"_a, "nx"_a, "t"_a = py::none());

  m.def(
      "convergence",
      [](const ExperimentConfig& cfg) {
        ErrorReport rep;
        {
          py::gil_scoped_release release;
          rep = convergence_study(cfg);
        }
        py::list rows;
        for (const auto& r : rep.rows)
          rows.append(py::dict("nx"_a = r.nx, "h"_a = r.h, "norms"_a = norms_dict(r.norms),
                               "runtime_seconds"_a = r.runtime_seconds, "failure"_a = r.failure));
        return py::dict("rows"_a = rows, "slopes"_a = norms_dict(rep.slopes), "exact"_a = rep.exact,
                        "complete"_a = rep.complete());
      },
      "config"_a);

  m.def(
      "compare",
      [](const ExperimentConfig& cfg) {
        CompareReport rep;
        {
          py::gil_scoped_release release;
          rep = compare_schemes(cfg);
        }
        return py::dict("x"_a = grid_points(rep.grid), "time"_a = rep.time, "components"_a = rep.component_names,
                        "reference"_a = to_array(rep.reference), "upwind"_a = to_array(rep.upwind),
                        "bap"_a = to_array(rep.bap), "upwind_summary"_a = summary_dict(rep.upwind_summary),
                        "bap_summary"_a = summary_dict(rep.bap_summary), "interface_points"_a = rep.interface_points);
      },
      "config"_a);

  m.def(
      "error_norms",
      [](const py::array_t<double>& numeric, const py::array_t<double>& reference, double h) {
        return norms_dict(error_norms(from_array(numeric), from_array(reference), h));
      },
      "numeric"_a, "reference"_a, "h"_a);
  m.def("fit_slope", &fit_slope, "h"_a, "err"_a);

  m.def(
      "m_eta_decompose",
      [](double a, double eta) {
        const EtaDecomposition d = m_eta_decompose(a, eta);
        return py::dict("lambda_plus"_a = d.lambda_plus, "lambda_minus"_a = d.lambda_minus, "l_plus"_a = d.l_plus,
                        "l_minus"_a = d.l_minus, "r_plus"_a = d.r_plus, "r_minus"_a = d.r_minus);
      },
      "a"_a, "eta"_a, "Eigen-decomposition of M(eta) = [[-eta a, 1 + eta], [1, 0]].");
  m.def("effective_eta", &effective_eta, "tau"_a, "eps"_a, "p"_a);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "relaxbl");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        py::gil_scoped_release release;
        return run_cli(static_cast<int>(argv.size()), argv.data());
      },
      "args"_a, "Run the command-line tool in-process; returns its exit code.");
}
