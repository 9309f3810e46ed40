#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stochsym/catalog.hpp"
#include "stochsym/path.hpp"
#include "stochsym/sde.hpp"
#include "stochsym/transform.hpp"

namespace stochsym {

enum class GirsanovDirection { kPOverQ, kQOverP };

// Left-endpoint log density along a path whose increments are Brownian under
// the denominator measure, with W_numerator = W_denominator - int h dt:
//   Q_over_P: sum h(X_k) dW_k - 1/2 |h(X_k)|^2 dt_k   (dW under P)
//   P_over_Q: sum -h(X_k) dW_k - 1/2 |h(X_k)|^2 dt_k  (dW under Q)
// dt_k are increments of the path's clock.
double girsanov_log_weight(const DiscretePath& path, const VectorField& h, GirsanovDirection direction);

// Function of the states at the observable's evaluation times.
struct Observable {
  std::string name;
  int arity = 1;
  std::function<double(const std::vector<Vec>& states)> fn;
};

// mean, x2, prod on the first coordinate.
Observable named_observable(const std::string& name);

struct ReconstructionPlan {
  std::string model;
  std::string route;
  Sde original;
  FiniteTransformation transform;
  Sde reduced;
  bool time_change = false;
  bool measure_change = false;
  Observable g;
  // Evaluation times. Single-time observables get one estimate per time,
  // multi-time observables one estimate over all of them.
  std::vector<double> times;
  int paths = 100000;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  Vec x0;
  Vec x0_reduced;
  double rejection_cap = 0.05;
  // Cap on the reduced clock when the route changes time; 0 means 10 t_max.
  double reduced_horizon = 0.0;
  std::vector<std::optional<double>> oracle;

  void validate() const;
};

ReconstructionPlan make_plan(const CatalogEntry& entry, const std::string& route,
                             const std::string& observable, std::vector<double> times, int paths,
                             double dt, std::uint64_t seed, std::optional<Vec> x0 = std::nullopt);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  // Accepted paths on the direct leg, ESS on the reconstructed one.
  double n_effective = 0.0;
  double rejected_frac = 0.0;
};

struct WeightStats {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;
  double max = 0.0;
  double ess = 0.0;
  int killed = 0;
};

struct LegResult {
  std::vector<Estimate> estimates;
  WeightStats weights;
  double horizon = 0.0;
  int rejected = 0;
};

struct McRow {
  std::vector<double> times;
  Estimate direct;
  Estimate reconstructed;
  double z = 0.0;
  std::optional<double> oracle;
  std::optional<double> z_direct_oracle;
  std::optional<double> z_reconstructed_oracle;
};

struct McReport {
  std::string model;
  std::string route;
  std::string observable;
  std::uint64_t seed = 0;
  int paths = 0;
  double dt = 0.0;
  double reduced_horizon = 0.0;
  std::vector<McRow> rows;
  WeightStats weights;
  double rejected_direct = 0.0;
  double rejected_reduced = 0.0;
  bool degenerate = false;
  std::vector<std::string> warnings;

  // All |z| <= z_max and no degeneracy warning.
  bool pass(double z_max = 3.0) const;
};

// Rows of the plan: groups of times sharing one estimate.
std::vector<std::vector<double>> plan_rows(const ReconstructionPlan& plan);

LegResult estimate_direct(const ReconstructionPlan& plan);
// Throws HorizonError when a reduced path's clock stays below t_max.
LegResult estimate_reconstructed(const ReconstructionPlan& plan);
// Runs both legs; the reduced horizon is doubled up to four times on HorizonError.
McReport run_reconstruction(const ReconstructionPlan& plan);

double z_score(double a, double se_a, double b, double se_b);

}  // namespace stochsym
