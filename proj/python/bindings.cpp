#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "stochsym/catalog.hpp"
#include "stochsym/cli.hpp"
#include "stochsym/errors.hpp"

namespace py = pybind11;
using namespace stochsym;

namespace {

RunConfig make_config(const std::string& command, const std::string& model, const std::string& route,
                      const std::map<std::string, double>& params, const std::string& derivatives) {
  RunConfig c;
  c.command = command;
  c.model = model;
  c.route = route;
  c.params = params;
  c.derivatives = parse_derivatives(derivatives);
  return c;
}

// Reports cross the boundary as JSON text; the Python side decodes them.
std::pair<int, std::string> finish(int code, const Json& report) { return {code, report.dump()}; }

}  // namespace

PYBIND11_MODULE(_stochsym, m) {
  m.doc() = "Symmetry checks and Monte Carlo reconstruction for catalog SDEs";
  // Later registrations are tried first, so the subclass goes last.
  py::register_exception<Error>(m, "NumericError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("version", &version);
  m.def("models", &model_ids);

  m.def(
      "verify",
      [](const std::string& model, const std::string& route, const std::map<std::string, double>& params, int points,
         std::uint64_t seed, const std::string& derivatives, std::optional<double> tol) {
        RunConfig c = make_config("verify", model, route, params, derivatives);
        c.points = points;
        c.seed = seed;
        c.tol = tol;
        Json report;
        py::gil_scoped_release release;
        const int code = cmd_verify(c, report);
        return finish(code, report);
      },
      py::arg("model"), py::arg("route") = "", py::arg("params") = std::map<std::string, double>{},
      py::arg("points") = 200, py::arg("seed") = 1, py::arg("derivatives") = "fd", py::arg("tol") = py::none());

  m.def(
      "reduce",
      [](const std::string& model, const std::string& route, const std::map<std::string, double>& params, int points,
         std::uint64_t seed, const std::string& derivatives) {
        RunConfig c = make_config("reduce", model, route, params, derivatives);
        c.points = points;
        c.seed = seed;
        Json report;
        py::gil_scoped_release release;
        const int code = cmd_reduce(c, report);
        return finish(code, report);
      },
      py::arg("model"), py::arg("route") = "", py::arg("params") = std::map<std::string, double>{},
      py::arg("points") = 200, py::arg("seed") = 1, py::arg("derivatives") = "fd");

  m.def(
      "reconstruct",
      [](const std::string& model, const std::string& route, const std::map<std::string, double>& params,
         const std::string& g, const std::vector<double>& t, int paths, double dt, std::uint64_t seed) {
        RunConfig c = make_config("reconstruct", model, route, params, "fd");
        c.observable = g;
        c.times = t;
        c.paths = paths;
        c.dt = dt;
        c.seed = seed;
        Json report;
        py::gil_scoped_release release;
        const int code = cmd_reconstruct(c, report);
        return finish(code, report);
      },
      py::arg("model"), py::arg("route") = "", py::arg("params") = std::map<std::string, double>{},
      py::arg("g") = "", py::arg("t") = std::vector<double>{1.0}, py::arg("paths") = 100000, py::arg("dt") = 1e-3,
      py::arg("seed") = 1);

  m.def(
      "oracle",
      [](const std::string& model, const std::string& observable, const std::vector<double>& times,
         std::optional<std::vector<double>> x0, const std::map<std::string, double>& params) {
        const auto e = get_model(model, params);
        Vec start = e.x0;
        if (x0) start = Eigen::Map<const Vec>(x0->data(), static_cast<Eigen::Index>(x0->size()));
        if (start.size() != e.sde.n) throw ConfigError("x0 has wrong dimension");
        return oracle_value(e, observable, times, start);
      },
      py::arg("model"), py::arg("observable"), py::arg("times"), py::arg("x0") = py::none(),
      py::arg("params") = std::map<std::string, double>{});

  m.def(
      "run",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "stochsym");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
