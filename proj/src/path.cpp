#include "stochsym/path.hpp"

#include <algorithm>
#include <cmath>

#include "stochsym/errors.hpp"

namespace stochsym {

std::vector<double> uniform_grid(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("grid: horizon and dt must be positive");
  const double ratio = horizon / dt;
  auto k = static_cast<long>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
  k = std::max(1L, k);
  std::vector<double> t(k + 1);
  for (long i = 0; i < k; ++i) t[i] = static_cast<double>(i) * dt;
  t[k] = horizon;
  return t;
}

DiscretePath simulate_em(const Sde& sde, const Vec& x0, double horizon, double dt, Stream& stream) {
  if (x0.size() != sde.n) throw ConfigError("simulate_em: x0 has wrong dimension");
  if (!sde.contains(x0)) throw DomainError("simulate_em: x0 outside domain");
  DiscretePath p;
  p.times = uniform_grid(horizon, dt);
  const int k_max = p.steps();
  const int n = sde.n;
  const int m = sde.m;
  p.states.resize(n, k_max + 1);
  p.dw.resize(m, k_max);
  p.states.col(0) = x0;

  std::array<double, kMaxDim> drift{};
  std::array<double, kMaxDim * kMaxDim> diff{};
  std::array<double, kMaxDim> noise{};
  int k = 0;
  for (; k < k_max; ++k) {
    const double h = p.times[k + 1] - p.times[k];
    const double sq = std::sqrt(h);
    const double* x = p.states.col(k).data();
    sde.mu.eval(x, drift.data());
    sde.sigma.eval(x, diff.data());
    for (int a = 0; a < m; ++a) noise[a] = sq * stream.normal();
    double* next = p.states.col(k + 1).data();
    for (int i = 0; i < n; ++i) {
      double v = x[i] + drift[i] * h;
      for (int a = 0; a < m; ++a) v += diff[i + a * n] * noise[a];
      next[i] = v;
    }
    for (int a = 0; a < m; ++a) p.dw(a, k) = noise[a];
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(next[i])) throw NumericError("simulate_em: non-finite state");
    if (!sde.contains(next)) {
      p.rejected = true;
      p.rejected_at = k + 1;
      ++k;
      break;
    }
  }
  const int kept = k + 1;
  p.times.resize(kept);
  p.states.conservativeResize(n, kept);
  p.dw.conservativeResize(m, kept - 1);
  p.log_weight.assign(kept, 0.0);
  p.clock = p.times;
  return p;
}

DiscretePath time_change_forward(const DiscretePath& path, const ScalarField& eta) {
  DiscretePath out = path;
  const int k_max = path.steps();
  out.clock.assign(k_max + 1, 0.0);
  for (int k = 0; k < k_max; ++k) {
    const double e = eta.eval(path.states.col(k).data());
    if (!(e > 0.0)) throw DomainError("time change: density must be positive");
    out.clock[k + 1] = out.clock[k] + e * (path.clock[k + 1] - path.clock[k]);
  }
  return out;
}

double time_change_inverse(const DiscretePath& path, double t_prime) {
  const auto& c = path.clock;
  if (c.empty()) throw RangeError("time change inverse: empty clock");
  if (t_prime < 0.0 || t_prime > c.back()) throw RangeError("time change inverse: beyond clock");
  const auto it = std::lower_bound(c.begin(), c.end(), t_prime);
  const auto k = static_cast<std::size_t>(it - c.begin());
  if (c[k] == t_prime || k == 0) return path.times[k];
  const double w = (t_prime - c[k - 1]) / (c[k] - c[k - 1]);
  return path.times[k - 1] + w * (path.times[k] - path.times[k - 1]);
}

int node_at(const std::vector<double>& times, double t) {
  if (times.empty() || t < 0.0) throw RangeError("evaluate_at: time out of range");
  // Grid nodes are k*dt, so allow rounding slack when t is meant to be a node.
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  if (t > times.back() + slack) throw RangeError("evaluate_at: time out of range");
  const auto it = std::upper_bound(times.begin(), times.end(), t + slack);
  return static_cast<int>(it - times.begin()) - 1;
}

Vec evaluate_at(const DiscretePath& path, double t) { return path.states.col(node_at(path.times, t)); }

}  // namespace stochsym
