#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kds/commands.hpp"
#include "kds/errors.hpp"
#include "kds/geometry.hpp"
#include "kds/io.hpp"
#include "kds/qnm.hpp"
#include "kds/trapping.hpp"

namespace py = pybind11;
using namespace kds;

PYBIND11_MODULE(_kds, m) {
  m.doc() = "Kerr-de Sitter geometry, trapping censuses and quasinormal modes";
  m.attr("__version__") = io::tool_version();

  py::register_exception<Error>(m, "KdsError", PyExc_RuntimeError);

  py::class_<SpacetimeParams>(m, "SpacetimeParams")
      .def_static("make", &SpacetimeParams::make, py::arg("lam"), py::arg("a"), py::arg("mass"))
      .def_property_readonly("lam", &SpacetimeParams::lambda)
      .def_property_readonly("a", &SpacetimeParams::a)
      .def_property_readonly("mass", &SpacetimeParams::mass)
      .def_property_readonly("b", &SpacetimeParams::b)
      .def_property_readonly("roots", &SpacetimeParams::roots)
      .def_property_readonly("r_e", &SpacetimeParams::r_e)
      .def_property_readonly("r_c", &SpacetimeParams::r_c)
      .def("mu", &SpacetimeParams::mu)
      .def("mu_prime", &SpacetimeParams::mu_prime)
      .def("mu_critical_radius", &SpacetimeParams::mu_critical_radius);

  py::class_<HorizonStructure>(m, "HorizonStructure")
      .def_readonly("r_e", &HorizonStructure::r_e)
      .def_readonly("r_c", &HorizonStructure::r_c)
      .def_readonly("kappa_e", &HorizonStructure::kappa_e)
      .def_readonly("kappa_c", &HorizonStructure::kappa_c)
      .def_readonly("delta", &HorizonStructure::delta);

  py::class_<Geometry>(m, "Geometry")
      .def_static("make", [](double lam, double a, double mass, double delta) {
        return Geometry::make(lam, a, mass, delta);
      }, py::arg("lam"), py::arg("a"), py::arg("mass"), py::arg("delta") = 0.2)
      .def_readonly("params", &Geometry::params)
      .def_readonly("horizons", &Geometry::horizons);

  py::class_<StationaryFrame>(m, "StationaryFrame")
      .def_static("make", &StationaryFrame::make, py::arg("params"), py::arg("r0"))
      .def_readonly("r0", &StationaryFrame::r0)
      .def_readonly("omega", &StationaryFrame::omega);

  m.def("t_norm", &t_norm, py::arg("params"), py::arg("frame"), py::arg("r"), py::arg("theta"));
  m.def("beta_threshold", &beta_threshold);
  m.def("beta_from_surface_gravity", &beta_from_surface_gravity);
  m.def("fredholm_window", &fredholm_window, py::arg("beta"), py::arg("s"));
  m.def("ergoregion_components", [](const SpacetimeParams& p, const StationaryFrame& f, int nr, int nt) {
    return ergoregion_map(p, f, nr, nt).spacelike_components();
  }, py::arg("params"), py::arg("frame"), py::arg("nr") = 200, py::arg("ntheta") = 100);

  m.def("trapping_scan", [](const Geometry& g, const StationaryFrame& f, int count, double epsilon,
                            std::uint64_t seed) {
    CensusOptions o;
    o.count = count;
    o.epsilon = epsilon;
    o.seed = seed;
    Census c;
    {
      py::gil_scoped_release release;
      c = trapping_scan(g, f, o);
    }
    py::dict d;
    d["sampled"] = c.sampled();
    d["trapped"] = c.trapped;
    d["escaped_low"] = c.escaped_low;
    d["escaped_high"] = c.escaped_high;
    d["failures"] = c.failures;
    d["max_drift"] = c.max_drift;
    return d;
  }, py::arg("geometry"), py::arg("frame"), py::arg("count") = 100, py::arg("epsilon") = 1e-3,
     py::arg("seed") = 1);

  m.def("solve_qnm", [](const Geometry& g, double r0, int mm, int nr, int ntheta, bool doubling) {
    WaveOperatorSpec spec;
    spec.frame = StationaryFrame::make(g.params, r0);
    spec.m = mm;
    GridSpec grid;
    grid.nr = nr;
    grid.ntheta = ntheta;
    SolveOptions so;
    so.window = SpectralWindow::defaults(g);
    so.doubling_check = doubling;
    QNMResult res;
    {
      py::gil_scoped_release release;
      res = solve_qnm(discretize(WaveOperator::assemble(g, spec), grid), so);
    }
    py::list out;
    for (const auto& md : res.modes) {
      py::dict d;
      d["sigma"] = md.sigma;
      d["sigma_lab"] = md.sigma_lab;
      d["multiplicity"] = md.multiplicity;
      d["residual"] = md.residual;
      d["doubling_delta"] = md.doubling_delta;
      d["l"] = md.dominant_l;
      out.append(d);
    }
    return out;
  }, py::arg("geometry"), py::arg("r0"), py::arg("m") = 0, py::arg("nr") = 32, py::arg("ntheta") = 4,
     py::arg("doubling") = true);

  m.def("run_command", [](const std::string& name, const std::string& config, const std::string& out,
                          std::optional<std::uint64_t> seed) {
    cli::RunOptions opt;
    opt.out = out;
    opt.seed = seed;
    std::ostringstream log;
    int code;
    try {
      const auto cfg = io::parse_config(config);
      py::gil_scoped_release release;
      code = cli::run_command(name, cfg, opt, log);
    } catch (const Error& e) {
      log << "error: " << e.what() << "\n";
      code = exit_code_for(e.code());
    }
    return py::make_tuple(code, log.str());
  }, py::arg("name"), py::arg("config"), py::arg("out"), py::arg("seed") = py::none(),
     "Runs a kds command on a JSON config string; returns (exit_code, log).");
}
