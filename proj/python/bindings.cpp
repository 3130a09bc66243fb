#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "madd/boundary.hpp"
#include "madd/checks.hpp"
#include "madd/cli_io.hpp"
#include "madd/errors.hpp"
#include "madd/green.hpp"
#include "madd/sections.hpp"
#include "madd/transforms.hpp"

namespace py = pybind11;
using namespace madd;

namespace {

LatticeVector lattice(const std::vector<std::int64_t>& x) { return LatticeVector(x); }

py::dict estimate_dict(const GreenEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["method"] = to_string(e.method);
  d["error"] = e.error;
  d["converged"] = e.converged;
  d["params"] = e.params;
  return d;
}

}  // namespace

PYBIND11_MODULE(_madd, m) {
  m.doc() = "Markov-additive process toolkit (0-based layer indices)";

  auto base = py::register_exception<Error>(m, "MaddError");
  py::register_exception<SpecError>(m, "SpecError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());

  py::class_<ProcessSpec>(m, "Spec")
      .def(py::init([](const std::string& text) { return parse_spec(text); }), py::arg("json"))
      .def_static("load", &load_spec, py::arg("path"))
      .def("to_json", &spec_to_json)
      .def_property_readonly("d", &ProcessSpec::dim)
      .def_property_readonly("p", &ProcessSpec::states)
      .def("markov_matrix", &ProcessSpec::markov_matrix)
      .def("jump", [](const ProcessSpec& s, int i, int j) {
        std::vector<std::pair<std::vector<std::int64_t>, double>> out;
        for (const auto& [x, mass] : s.jump(i, j).atoms()) out.emplace_back(x.coords, mass);
        return out;
      });

  py::class_<GreenEstimate>(m, "GreenEstimate")
      .def_readonly("value", &GreenEstimate::value)
      .def_readonly("error", &GreenEstimate::error)
      .def_readonly("converged", &GreenEstimate::converged)
      .def_readonly("params", &GreenEstimate::params)
      .def_property_readonly("method", [](const GreenEstimate& e) { return to_string(e.method); })
      .def("as_dict", &estimate_dict);

  m.def("validate", [](const ProcessSpec& s) {
    const ValidationReport v = validate(s);
    py::dict d;
    d["rows_stochastic"] = v.rows_stochastic;
    d["markov_irreducible"] = v.markov_irreducible;
    d["full_chain_irreducible"] = v.full_chain_irreducible;
    d["aperiodic"] = v.aperiodic;
    d["non_centered"] = v.non_centered;
    d["period"] = v.period;
    d["displacement_cone_full"] = v.displacement_cone_full;
    d["global_drift_norm"] = v.global_drift_norm;
    d["displacement_lattice_index"] = v.displacement_lattice_index;
    d["spectral_scan_max"] = v.spectral_scan_max;
    d["diagnostics"] = v.diagnostics;
    return d;
  });
  m.def("stationary_distribution", [](const ProcessSpec& s) { return Eigen::VectorXd(stationary_distribution(s).transpose()); });
  m.def("moments", [](const ProcessSpec& s) {
    const MomentData md = moments(s);
    py::dict d;
    d["pi"] = Eigen::VectorXd(md.pi.transpose());
    d["global_drift"] = md.global_drift;
    d["local_drifts"] = md.local_drifts;
    d["second_moments"] = md.second_moments;
    return d;
  });
  m.def("fourier", [](const ProcessSpec& s, const Eigen::VectorXd& theta) { return fourier(s, theta); });
  m.def("laplace", &laplace);
  m.def("perron_triple", [](const Eigen::MatrixXd& mat) {
    const PerronTriple t = perron_triple(mat);
    return py::make_tuple(t.rho, t.right, t.left);
  });
  m.def("spectral_scan", [](const ProcessSpec& s, int n) {
    const ScanReport r = spectral_scan(s, n);
    return py::make_tuple(r.max_radius, r.argmax);
  });
  m.def("appropriate_section", [](const ProcessSpec& s) { return appropriate_section(s).g; });
  m.def("energy_matrix", [](const ProcessSpec& s) { return energy_matrix(s).sigma; });
  m.def("rho_eval", [](const ProcessSpec& s, const Eigen::VectorXd& c) {
    const RhoEvaluation e = rho_eval(s, c);
    return py::make_tuple(e.rho, e.grad, e.hess);
  });
  m.def("boundary_point", [](const ProcessSpec& s, const Eigen::VectorXd& u) {
    const BoundaryPoint b = boundary_point(s, u);
    py::dict d;
    d["u"] = b.u;
    d["c"] = b.c;
    d["m_c"] = b.m_c;
    d["rho_residual"] = b.rho_residual;
    d["direction_residual"] = b.direction_residual;
    return d;
  });
  m.def("doob_transform", [](const ProcessSpec& s, const Eigen::VectorXd& c) {
    DoobTransform t = doob_transform(s, c);
    return py::make_tuple(t.phi, std::move(t.transformed));
  });

  m.def(
      "green_series",
      [](const ProcessSpec& s, int i, const std::vector<std::int64_t>& x, int j, int horizon, double tolerance) {
        SeriesOptions o;
        o.horizon = horizon;
        o.tolerance = tolerance;
        return green_series(s, i, lattice(x), j, o);
      },
      py::arg("spec"), py::arg("i"), py::arg("x"), py::arg("j"), py::arg("horizon") = 2000, py::arg("tolerance") = 0.0);
  m.def(
      "green_resolvent",
      [](const ProcessSpec& s, int i, const std::vector<std::int64_t>& x, int j, const std::string& mode, int grid) {
        ResolventOptions o;
        o.mode = parse_resolvent_mode(mode);
        o.grid = grid;
        py::gil_scoped_release release;
        return green_resolvent(s, i, lattice(x), j, o);
      },
      py::arg("spec"), py::arg("i"), py::arg("x"), py::arg("j"), py::arg("mode") = "tilted", py::arg("grid") = 0);
  m.def(
      "green_mc",
      [](const ProcessSpec& s, int i, const std::vector<std::int64_t>& x, int j, std::int64_t paths, int horizon,
         std::uint64_t seed) {
        McOptions o;
        o.paths = paths;
        o.horizon = horizon;
        o.seed = seed;
        py::gil_scoped_release release;
        return green_mc(s, i, lattice(x), j, o);
      },
      py::arg("spec"), py::arg("i"), py::arg("x"), py::arg("j"), py::arg("paths") = 100000, py::arg("horizon") = 500,
      py::arg("seed") = 1);

  m.def(
      "asymptotic_coefficient",
      [](const ProcessSpec& s, const Eigen::VectorXd& u, std::optional<double> m_exponent) {
        AsymptoticOptions o;
        if (m_exponent) o.m_exponent = *m_exponent;
        const AsymptoticCoefficient a = asymptotic_coefficient(s, u, o);
        py::dict d;
        d["u"] = a.u;
        d["c"] = a.c;
        d["m_c_norm"] = a.m_c_norm;
        d["rotation"] = a.rotation;
        d["sigma_u"] = a.sigma_u;
        d["sigma_u_1"] = a.sigma_u_1;
        d["proj0"] = a.proj0;
        d["phi"] = a.phi;
        d["chi"] = a.chi;
        d["m_exponent"] = a.m_exponent;
        return d;
      },
      py::arg("spec"), py::arg("u"), py::arg("m_exponent") = py::none());
  m.def(
      "asymptotic_green",
      [](const ProcessSpec& s, int i, const std::vector<std::int64_t>& x, int j, std::optional<double> m_exponent) {
        AsymptoticOptions o;
        if (m_exponent) o.m_exponent = *m_exponent;
        return asymptotic_green(s, i, lattice(x), j, o);
      },
      py::arg("spec"), py::arg("i"), py::arg("x"), py::arg("j"), py::arg("m_exponent") = py::none());
  m.def(
      "compare",
      [](const ProcessSpec& s, const Eigen::VectorXd& u, const std::vector<double>& radii, int i, int j,
         const std::vector<std::string>& methods) {
        CompareOptions o;
        o.methods.clear();
        for (const auto& name : methods) o.methods.push_back(parse_green_method(name));
        const CompareReport rep = compare(s, u, radii, i, j, o);
        py::list rows;
        for (const auto& r : rep.rows) {
          py::dict d;
          d["r"] = r.r;
          d["x"] = r.x.coords;
          d["method"] = to_string(r.method);
          d["value"] = r.value;
          d["error"] = r.error;
          d["asym"] = r.asym;
          d["ratio"] = r.ratio;
          rows.append(d);
        }
        return py::make_tuple(rows, rep.doob_residual);
      },
      py::arg("spec"), py::arg("u"), py::arg("radii"), py::arg("i") = 0, py::arg("j") = 0,
      py::arg("methods") = std::vector<std::string>{"series"});
  m.def(
      "run_checks",
      [](const ProcessSpec& s, int directions, long long mc_paths) {
        CheckOptions o;
        o.directions = directions;
        o.mc_paths = mc_paths;
        std::vector<std::tuple<std::string, bool, double>> out;
        for (const auto& c : run_checks(s, o)) out.emplace_back(c.name, c.passed, c.value);
        return out;
      },
      py::arg("spec"), py::arg("directions") = 16, py::arg("mc_paths") = 20000);
}
