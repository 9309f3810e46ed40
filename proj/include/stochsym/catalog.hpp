#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stochsym/sde.hpp"
#include "stochsym/symmetry.hpp"
#include "stochsym/transform.hpp"

namespace stochsym {

enum class Derivatives { kFiniteDifference, kAnalytic };

Derivatives parse_derivatives(const std::string& s);
std::string to_string(Derivatives d);

using Params = std::vector<std::pair<std::string, double>>;

// One reduction of a catalog model: the transformation, the reduced SDE in
// closed form, and the symmetries it straightens.
struct Route {
  std::string id;
  FiniteTransformation reduction;
  Sde reduced;
  int triangular_r = 1;
  // Potential of the reduction's Girsanov part (h = sigma^T grad potential).
  std::optional<ScalarField> potential;
  // Indices into CatalogEntry::symmetries straightened by this route.
  std::vector<int> symmetries;
  // Structure constants e^k_ij of those symmetries, constants[k](i, j).
  std::vector<Mat> structure_constants;
  bool time_change = false;
  bool measure_change = false;
  bool rotation = false;

  Vec initial_map(const Vec& x0) const { return reduction.phi.forward(x0); }
};

struct CatalogEntry {
  std::string id;
  Params params;
  Derivatives derivatives = Derivatives::kFiniteDifference;
  Sde sde;
  std::vector<InfinitesimalTransformation> symmetries;
  std::vector<std::string> symmetry_names;
  std::vector<Route> routes;
  std::string default_route;
  Box test_box;
  Vec x0;
  std::string default_observable;

  double param(const std::string& name) const;
  const Route& route(const std::string& id) const;
  std::vector<InfinitesimalTransformation> route_symmetries(const Route& r) const;
};

const std::vector<std::string>& model_ids();
Params default_params(const std::string& id);

CatalogEntry get_model(const std::string& id, const std::map<std::string, double>& overrides = {},
                       Derivatives derivatives = Derivatives::kFiniteDifference);

// Observables act on the first state coordinate: mean -> x, x2 -> x^2,
// prod -> x(t1) x(t2) (two times).
int observable_times(const std::string& observable);
double observable_value(const std::string& observable, const std::vector<double>& first_coords);

// Closed-form expectation when one is known for (model, observable).
std::optional<double> oracle_value(const CatalogEntry& entry, const std::string& observable,
                                   const std::vector<double>& times, const Vec& x0);

}  // namespace stochsym
