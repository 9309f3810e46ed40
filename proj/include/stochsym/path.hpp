#pragma once

#include <vector>

#include "stochsym/field.hpp"
#include "stochsym/rng.hpp"
#include "stochsym/sde.hpp"

namespace stochsym {

// Discretized solution on a time grid. `times` is the grid the path was
// produced on; `clock` is the running time of the process itself (equal to
// `times` for a freshly simulated path, the integrated density after a time
// change). Columns of `states` are nodes, columns of `dw` are increments.
struct DiscretePath {
  std::vector<double> times;
  Mat states;
  Mat dw;
  std::vector<double> log_weight;
  std::vector<double> clock;
  bool rejected = false;
  int rejected_at = -1;

  int steps() const { return static_cast<int>(times.size()) - 1; }
  int dim() const { return static_cast<int>(states.rows()); }
  int noise_dim() const { return static_cast<int>(dw.rows()); }
  Vec state(int k) const { return states.col(k); }
};

// Uniform grid 0, dt, 2dt, ..., horizon; the last step is shortened when
// horizon is not a multiple of dt.
std::vector<double> uniform_grid(double horizon, double dt);

DiscretePath simulate_em(const Sde& sde, const Vec& x0, double horizon, double dt, Stream& stream);

// Left-endpoint integral of eta along the path, measured in the path's own clock.
DiscretePath time_change_forward(const DiscretePath& path, const ScalarField& eta);

// Generalized inverse of the clock: the grid time at which clock reaches t_prime.
double time_change_inverse(const DiscretePath& path, double t_prime);

// State at the last node with times[k] <= t.
Vec evaluate_at(const DiscretePath& path, double t);
int node_at(const std::vector<double>& times, double t);

}  // namespace stochsym
