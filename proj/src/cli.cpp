#include "stochsym/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stochsym/errors.hpp"
#include "stochsym/reconstruct.hpp"
#include "stochsym/symmetry.hpp"

#ifndef STOCHSYM_VERSION
#define STOCHSYM_VERSION "unknown"
#endif

namespace stochsym {

const char* version() { return STOCHSYM_VERSION; }

double RunConfig::tolerance() const {
  if (tol) return *tol;
  return derivatives == Derivatives::kAnalytic ? 1e-9 : 1e-5;
}

double RunConfig::closure_tolerance() const { return closure_tol ? *closure_tol : tolerance(); }

void RunConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
  };
  if (command != "all" && model.empty()) throw ConfigError("--model is required");
  if (command == "all" && (!model.empty() || !route.empty() || !params.empty()))
    throw ConfigError("all runs every model with defaults; use --models to filter");
  if (models && models->empty()) throw ConfigError("empty model filter");
  if (points < 1) throw ConfigError("--points must be >= 1");
  if (paths < 2) throw ConfigError("--paths must be >= 2");
  positive(dt, "--dt");
  positive(tolerance(), "--tol");
  positive(closure_tolerance(), "--closure-tol");
  positive(triangular_tol, "--triangular-tol");
  positive(match_tol, "--match-tol");
  if (times.empty()) throw ConfigError("--t needs at least one time");
  if (format != "json" && format != "csv") throw ConfigError("--format must be json or csv");
}

Json config_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  if (!c.model.empty()) j["model"] = c.model;
  if (c.models) j["models"] = *c.models;
  if (!c.route.empty()) j["route"] = c.route;
  Json params = Json::object();
  for (const auto& [k, v] : c.params) params[k] = v;
  j["params"] = params;
  j["derivatives"] = to_string(c.derivatives);
  j["points"] = c.points;
  j["seed"] = c.seed;
  j["tol"] = c.tolerance();
  j["closure_tol"] = c.closure_tolerance();
  j["triangular_tol"] = c.triangular_tol;
  j["match_tol"] = c.match_tol;
  if (!c.observable.empty()) j["g"] = c.observable;
  j["t"] = c.times;
  j["paths"] = c.paths;
  j["dt"] = c.dt;
  j["format"] = c.format;
  return j;
}

namespace {

struct Block {
  Json reports = Json::array();
  bool pass = true;

  void add(const std::string& subject, const ResidualReport& r) {
    Json j = {{"subject", subject}};
    j.update(to_json(r));
    reports.push_back(std::move(j));
    pass = pass && r.pass;
  }
  Json json() const { return {{"pass", pass}, {"reports", reports}}; }
};

Json params_json(const CatalogEntry& e) {
  Json j = Json::object();
  for (const auto& [k, v] : e.params) j[k] = v;
  return j;
}

std::vector<const Route*> selected_routes(const CatalogEntry& e, const std::string& route) {
  std::vector<const Route*> out;
  if (!route.empty()) {
    out.push_back(&e.route(route));
    return out;
  }
  for (const auto& r : e.routes) out.push_back(&r);
  return out;
}

std::vector<Vec> image_points(const Route& r, const std::vector<Vec>& pts) {
  std::vector<Vec> img;
  img.reserve(pts.size());
  for (const auto& x : pts) img.push_back(r.reduction.phi.forward(x));
  return img;
}

// Adds the distance between fitted and cataloged structure constants.
void compare_constants(ResidualReport& rep, const std::vector<Mat>& fitted, const Route& route) {
  double d = 0.0;
  for (std::size_t k = 0; k < fitted.size() && k < route.structure_constants.size(); ++k)
    d = std::max(d, (fitted[k] - route.structure_constants[k]).cwiseAbs().maxCoeff());
  rep.equations.push_back({"catalog_constants", d, d});
  rep.max_residual = std::max(rep.max_residual, d);
  rep.pass = rep.points > 0 && rep.max_residual <= rep.tolerance;
}

ResidualReport reduction_match(const CatalogEntry& e, const Route& r, const std::vector<Vec>& pts,
                               double tol) {
  const Sde transformed = transform_sde(r.reduction, e.sde);
  ResidualReport rep;
  rep.op = "reduction_match";
  rep.model = e.id;
  rep.tolerance = tol;
  double drift = 0.0, diffusion = 0.0, drift_sum = 0.0, diffusion_sum = 0.0;
  for (const auto& x : pts) {
    try {
      const Vec xp = r.reduction.phi.forward(x);
      const double a = (transformed.mu(xp) - r.reduced.mu(xp)).cwiseAbs().maxCoeff();
      const double b = (transformed.sigma(xp) - r.reduced.sigma(xp)).cwiseAbs().maxCoeff();
      if (!std::isfinite(a) || !std::isfinite(b)) throw NumericError("reduction: non-finite coefficients");
      drift = std::max(drift, a);
      diffusion = std::max(diffusion, b);
      drift_sum += a;
      diffusion_sum += b;
      ++rep.points;
    } catch (const DomainError&) {
      ++rep.skipped;
    }
  }
  const double n = std::max(1, rep.points);
  rep.equations = {{"drift", drift, drift_sum / n}, {"diffusion", diffusion, diffusion_sum / n}};
  rep.max_residual = std::max(drift, diffusion);
  rep.mean_residual = (drift_sum + diffusion_sum) / (2.0 * n);
  rep.pass = rep.points > 0 && rep.max_residual <= tol;
  return rep;
}

Json verify_model(const CatalogEntry& e, const RunConfig& c, bool& pass) {
  const auto pts = sample_box(e.test_box, c.points, c.seed);
  const auto routes = selected_routes(e, c.route);
  const double tol = c.tolerance();

  Block determining;
  for (std::size_t i = 0; i < e.symmetries.size(); ++i) {
    auto r = check_determining_equations(e.symmetries[i], e.sde, pts, tol);
    r.model = e.id;
    determining.add(e.symmetry_names[i], r);
  }

  Block quasi_doob;
  for (const Route* route : routes) {
    if (!route->potential) continue;
    auto r = check_quasi_doob(route->reduction.h, *route->potential, e.sde, pts, tol);
    r.model = e.id;
    quasi_doob.add("route " + route->id, r);
  }
  for (std::size_t i = 0; i < e.symmetries.size(); ++i) {
    const auto& v = e.symmetries[i];
    if (!v.k) continue;
    auto r = check_quasi_doob(v.hh, *v.k, e.sde, pts, tol);
    r.model = e.id;
    quasi_doob.add(e.symmetry_names[i], r);
  }

  Block closure;
  Block straightening;
  Block triangular;
  for (const Route* route : routes) {
    const auto syms = e.route_symmetries(*route);
    std::vector<Mat> constants;
    auto cl = check_algebra_closure(syms, e.sde, pts, c.closure_tolerance(), &constants);
    cl.model = e.id;
    compare_constants(cl, constants, *route);
    closure.add("route " + route->id, cl);

    auto st = check_straightening(route->reduction, syms, pts, tol, &e.sde, route->potential);
    st.model = e.id;
    straightening.add("route " + route->id, st);

    const auto img = image_points(*route, pts);
    auto tt = check_triangular(transform_sde(route->reduction, e.sde), route->triangular_r, img,
                               c.triangular_tol);
    tt.model = e.id;
    triangular.add("route " + route->id + " transformed", tt);
    auto te = check_triangular(route->reduced, route->triangular_r, img, c.triangular_tol);
    te.model = e.id;
    triangular.add("route " + route->id + " expected", te);
  }

  pass = determining.pass && quasi_doob.pass && closure.pass && straightening.pass && triangular.pass;
  Json j;
  j["model"] = e.id;
  j["params"] = params_json(e);
  j["determining"] = determining.json();
  j["quasi_doob"] = quasi_doob.json();
  j["closure"] = closure.json();
  j["straightening"] = straightening.json();
  j["triangular"] = triangular.json();
  j["pass"] = pass;
  return j;
}

Json reduce_model(const CatalogEntry& e, const RunConfig& c, bool& pass) {
  const auto pts = sample_box(e.test_box, c.points, c.seed);
  Block match;
  Block triangular;
  for (const Route* route : selected_routes(e, c.route)) {
    match.add("route " + route->id, reduction_match(e, *route, pts, c.match_tol));
    auto tt = check_triangular(transform_sde(route->reduction, e.sde), route->triangular_r,
                               image_points(*route, pts), c.triangular_tol);
    tt.model = e.id;
    triangular.add("route " + route->id + " transformed", tt);
  }
  pass = match.pass && triangular.pass;
  Json j;
  j["model"] = e.id;
  j["params"] = params_json(e);
  j["reduction"] = match.json();
  j["triangular"] = triangular.json();
  j["pass"] = pass;
  return j;
}

McReport reconstruct_model(const CatalogEntry& e, const RunConfig& c) {
  const auto plan = make_plan(e, c.route.empty() ? e.default_route : c.route, c.observable, c.times,
                              c.paths, c.dt, c.seed);
  return run_reconstruction(plan);
}

Json envelope(const RunConfig& c) {
  Json j;
  j["version"] = version();
  j["config"] = config_json(c);
  return j;
}

int error_code(const std::exception& ex) {
  if (dynamic_cast<const ConfigError*>(&ex) != nullptr) return kExitConfig;
  return kExitNumeric;
}

}  // namespace

int cmd_verify(const RunConfig& c, Json& report) {
  c.validate();
  report = envelope(c);
  const auto e = get_model(c.model, c.params, c.derivatives);
  bool pass = false;
  report["result"] = verify_model(e, c, pass);
  report["pass"] = pass;
  return pass ? kExitPass : kExitFailed;
}

int cmd_reduce(const RunConfig& c, Json& report) {
  c.validate();
  report = envelope(c);
  const auto e = get_model(c.model, c.params, c.derivatives);
  bool pass = false;
  report["result"] = reduce_model(e, c, pass);
  report["pass"] = pass;
  return pass ? kExitPass : kExitFailed;
}

int cmd_reconstruct(const RunConfig& c, Json& report, std::vector<McReport>* mc) {
  c.validate();
  report = envelope(c);
  const auto e = get_model(c.model, c.params, c.derivatives);
  const McReport rep = reconstruct_model(e, c);
  Json r = to_json(rep);
  r["params"] = params_json(e);
  report["result"] = r;
  report["pass"] = rep.pass();
  if (mc != nullptr) mc->push_back(rep);
  return rep.pass() ? kExitPass : kExitFailed;
}

int cmd_all(const RunConfig& c, Json& report, std::vector<McReport>* mc) {
  c.validate();
  report = envelope(c);
  const auto ids = c.models ? *c.models : model_ids();
  for (const auto& id : ids)
    if (std::find(model_ids().begin(), model_ids().end(), id) == model_ids().end())
      throw ConfigError("unknown model: " + id);
  int code = kExitPass;
  auto record = [&](int rc) {
    if (code == kExitPass) code = rc;
  };
  Json results = Json::array();
  for (const auto& id : ids) {
    Json entry;
    entry["model"] = id;
    RunConfig sub = c;
    sub.model = id;
    try {
      const auto e = get_model(id, {}, c.derivatives);
      bool pass = false;
      entry["verify"] = verify_model(e, sub, pass);
      record(pass ? kExitPass : kExitFailed);
    } catch (const std::exception& ex) {
      entry["verify"] = {{"error", ex.what()}};
      record(error_code(ex));
    }
    try {
      const auto e = get_model(id, {}, c.derivatives);
      const McReport rep = reconstruct_model(e, sub);
      entry["reconstruct"] = to_json(rep);
      if (mc != nullptr) mc->push_back(rep);
      record(rep.pass() ? kExitPass : kExitFailed);
    } catch (const std::exception& ex) {
      entry["reconstruct"] = {{"error", ex.what()}};
      record(error_code(ex));
    }
    results.push_back(entry);
  }
  report["results"] = results;
  report["pass"] = code == kExitPass;
  return code;
}

namespace {

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects name=value, got " + s);
    const std::string value = s.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw ConfigError("--param value is not a number: " + s);
    out[s.substr(0, eq)] = v;
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_report(const RunConfig& c, const Json& report, const std::vector<McReport>& mc,
                  std::ostream& out) {
  std::ofstream file;
  std::ostream* os = &out;
  if (!c.out.empty()) {
    file.open(c.out);
    if (!file) throw ConfigError("cannot open output file " + c.out);
    os = &file;
  }
  if (c.format == "csv") {
    *os << csv_header() << '\n';
    for (const auto& r : mc) write_csv(*os, r);
  } else {
    *os << report.dump(2) << '\n';
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical checks and Monte Carlo reconstruction for SDE symmetry reductions", "stochsym"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(version()));

  RunConfig c;
  std::vector<std::string> params;
  std::string derivatives = "fd";
  std::string models;
  std::vector<double> times;
  double tol = 0.0;
  double closure_tol = 0.0;

  app.add_option("--model", c.model, "Catalog model: bessel, cir, ou, twod");
  app.add_option("--models", models, "Comma-separated model filter for `all`");
  app.add_option("--route", c.route, "Reduction route (default: the model's default)");
  app.add_option("--param", params, "Model parameter override name=value (repeatable)");
  app.add_option("--derivatives", derivatives, "Derivative evaluation: fd or analytic");
  app.add_option("--points", c.points, "Sample points for residual checks");
  app.add_option("--seed", c.seed, "Master seed");
  auto* tol_opt = app.add_option("--tol", tol, "Residual tolerance (default 1e-5 fd, 1e-9 analytic)");
  auto* ctol_opt = app.add_option("--closure-tol", closure_tol, "Closure tolerance (default --tol)");
  app.add_option("--triangular-tol", c.triangular_tol, "Relative threshold for forbidden partials");
  app.add_option("--match-tol", c.match_tol, "Reduced-SDE match tolerance");
  app.add_option("--g", c.observable, "Observable: mean, x2, prod");
  app.add_option("--t", times, "Evaluation time (repeatable)");
  app.add_option("--paths", c.paths, "Monte Carlo paths per leg");
  app.add_option("--dt", c.dt, "Euler-Maruyama step");
  app.add_option("--out", c.out, "Output file (default stdout)");
  app.add_option("--format", c.format, "json or csv");
  auto* models_opt = app.get_option("--models");

  app.add_subcommand("verify", "Check the model's symmetries and reduction routes");
  app.add_subcommand("reduce", "Check one reduction route against its reduced SDE");
  app.add_subcommand("reconstruct", "Compare direct and reconstructed Monte Carlo estimates");
  app.add_subcommand("all", "verify and reconstruct every catalog model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  Json report;
  std::vector<McReport> mc;
  int code = kExitPass;
  try {
    c.command = app.get_subcommands().front()->get_name();
    c.params = parse_params(params);
    c.derivatives = parse_derivatives(derivatives);
    if (!tol_opt->empty()) c.tol = tol;
    if (!ctol_opt->empty()) c.closure_tol = closure_tol;
    if (!models_opt->empty()) c.models = split_list(models);
    if (!times.empty()) c.times = times;
    c.validate();
    if (c.format == "csv" && (c.command == "verify" || c.command == "reduce"))
      throw ConfigError("csv output is only available for reconstruction reports");
    if (c.command == "verify") code = cmd_verify(c, report);
    if (c.command == "reduce") code = cmd_reduce(c, report);
    if (c.command == "reconstruct") code = cmd_reconstruct(c, report, &mc);
    if (c.command == "all") code = cmd_all(c, report, &mc);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    code = error_code(ex);
    if (code == kExitConfig) return code;
    report = envelope(c);
    report["error"] = ex.what();
    report["pass"] = false;
  }
  try {
    write_report(c, report, mc, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitConfig;
  }
  return code;
}

}  // namespace stochsym
