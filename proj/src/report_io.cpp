#include "stochsym/report_io.hpp"

#include <charconv>
#include <cmath>

namespace stochsym {

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class T>
Json optional_number(const std::optional<T>& v) {
  return v ? number_or_null(*v) : Json(nullptr);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json to_json(const ResidualReport& r) {
  Json j;
  j["op"] = r.op;
  j["model"] = r.model;
  j["points"] = r.points;
  j["skipped"] = r.skipped;
  j["max_residual"] = number_or_null(r.max_residual);
  j["mean_residual"] = number_or_null(r.mean_residual);
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  Json eqs = Json::array();
  for (const auto& e : r.equations)
    eqs.push_back({{"name", e.name}, {"max", number_or_null(e.max)}, {"mean", number_or_null(e.mean)}});
  j["equations"] = eqs;
  Json vals = Json::object();
  for (const auto& [name, v] : r.values) vals[name] = number_or_null(v);
  j["values"] = vals;
  return j;
}

Json to_json(const Estimate& e) {
  return {{"value", number_or_null(e.value)},
          {"stderr", number_or_null(e.std_error)},
          {"n_effective", number_or_null(e.n_effective)},
          {"rejected_frac", e.rejected_frac}};
}

Json to_json(const WeightStats& w) {
  return {{"mean", number_or_null(w.mean)},  {"stderr", number_or_null(w.std_error)},
          {"variance", number_or_null(w.variance)}, {"max", number_or_null(w.max)},
          {"ess", number_or_null(w.ess)},    {"killed", w.killed}};
}

Json to_json(const McReport& r) {
  Json j;
  j["model"] = r.model;
  j["route"] = r.route;
  j["observable"] = r.observable;
  j["seed"] = r.seed;
  j["paths"] = r.paths;
  j["dt"] = r.dt;
  j["reduced_horizon"] = r.reduced_horizon;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json x;
    x["times"] = row.times;
    x["direct"] = to_json(row.direct);
    x["reconstructed"] = to_json(row.reconstructed);
    x["z"] = number_or_null(row.z);
    x["oracle"] = optional_number(row.oracle);
    x["z_direct_oracle"] = optional_number(row.z_direct_oracle);
    x["z_reconstructed_oracle"] = optional_number(row.z_reconstructed_oracle);
    rows.push_back(x);
  }
  j["rows"] = rows;
  j["weights"] = to_json(r.weights);
  j["rejected_direct"] = r.rejected_direct;
  j["rejected_reduced"] = r.rejected_reduced;
  j["degenerate"] = r.degenerate;
  j["warnings"] = r.warnings;
  j["pass"] = r.pass();
  return j;
}

std::string csv_header() { return "model,route,time,estimator,value,stderr,n_effective,rejected_frac"; }

void write_csv(std::ostream& out, const McReport& r) {
  auto line = [&](double t, const char* est, const std::string& value, const std::string& se,
                  const std::string& neff, const std::string& rej) {
    out << r.model << ',' << r.route << ',' << format_double(t) << ',' << est << ',' << value << ','
        << se << ',' << neff << ',' << rej << '\n';
  };
  for (const auto& row : r.rows) {
    const double t = row.times.back();
    for (const auto& [name, e] : {std::pair{"direct", &row.direct}, std::pair{"reconstructed", &row.reconstructed}})
      line(t, name, format_double(e->value), format_double(e->std_error), format_double(e->n_effective),
           format_double(e->rejected_frac));
    if (row.oracle) line(t, "oracle", format_double(*row.oracle), "0", "", "");
  }
}

}  // namespace stochsym
