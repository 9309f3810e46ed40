#include "stochsym/reconstruct.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "stochsym/errors.hpp"
#include "stochsym/parallel.hpp"
#include "stochsym/rng.hpp"

namespace stochsym {

double girsanov_log_weight(const DiscretePath& path, const VectorField& h, GirsanovDirection direction) {
  const int m = path.noise_dim();
  if (h.dim() != m) throw ConfigError("girsanov: h has wrong dimension");
  const double sign = direction == GirsanovDirection::kQOverP ? 1.0 : -1.0;
  std::array<double, kMaxDim> hv{};
  double acc = 0.0;
  for (int k = 0; k < path.steps(); ++k) {
    h.eval(path.states.col(k).data(), hv.data());
    const double dt = path.clock[k + 1] - path.clock[k];
    double dot = 0.0;
    double sq = 0.0;
    for (int a = 0; a < m; ++a) {
      if (!std::isfinite(hv[a])) throw NumericError("girsanov: non-finite h along path");
      dot += hv[a] * path.dw(a, k);
      sq += hv[a] * hv[a];
    }
    acc += sign * dot - 0.5 * sq * dt;
  }
  return acc;
}

Observable named_observable(const std::string& name) {
  const int arity = observable_times(name);
  return {name, arity, [name](const std::vector<Vec>& states) {
            std::vector<double> first(states.size());
            for (std::size_t i = 0; i < states.size(); ++i) first[i] = states[i](0);
            return observable_value(name, first);
          }};
}

void ReconstructionPlan::validate() const {
  if (paths < 2) throw ConfigError("plan: at least two paths are required");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("plan: dt must be positive");
  if (times.empty()) throw ConfigError("plan: no evaluation times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i])) throw ConfigError("plan: times must be >= 0");
    if (i > 0 && !(times[i] > times[i - 1])) throw ConfigError("plan: times must increase");
  }
  if (!g.fn) throw ConfigError("plan: no observable");
  if (g.arity > 1 && static_cast<int>(times.size()) != g.arity)
    throw ConfigError("plan: observable " + g.name + " needs " + std::to_string(g.arity) + " times");
  if (x0.size() != original.n || x0_reduced.size() != reduced.n)
    throw ConfigError("plan: initial state has wrong dimension");
  if (!original.contains(x0)) throw ConfigError("plan: x0 outside the model domain");
  if (!reduced.contains(x0_reduced)) throw ConfigError("plan: mapped x0 outside the reduced domain");
  if (!(rejection_cap >= 0.0 && rejection_cap <= 1.0)) throw ConfigError("plan: bad rejection cap");
}

std::vector<std::vector<double>> plan_rows(const ReconstructionPlan& plan) {
  if (plan.g.arity > 1) return {plan.times};
  std::vector<std::vector<double>> rows;
  for (double t : plan.times) rows.push_back({t});
  return rows;
}

ReconstructionPlan make_plan(const CatalogEntry& entry, const std::string& route,
                             const std::string& observable, std::vector<double> times, int paths,
                             double dt, std::uint64_t seed, std::optional<Vec> x0) {
  const Route& r = entry.route(route);
  ReconstructionPlan p;
  p.model = entry.id;
  p.route = r.id;
  p.original = entry.sde;
  p.transform = r.reduction;
  p.reduced = r.reduced;
  p.time_change = r.time_change;
  p.measure_change = r.measure_change || r.rotation;
  p.g = named_observable(observable.empty() ? entry.default_observable : observable);
  p.times = std::move(times);
  p.paths = paths;
  p.dt = dt;
  p.seed = seed;
  p.x0 = x0 ? *x0 : entry.x0;
  if (p.x0.size() != entry.sde.n) throw ConfigError("plan: x0 has wrong dimension");
  if (!entry.sde.contains(p.x0)) throw ConfigError("plan: x0 outside the model domain");
  p.x0_reduced = r.initial_map(p.x0);
  for (const auto& row : plan_rows(p)) p.oracle.push_back(oracle_value(entry, p.g.name, row, p.x0));
  p.validate();
  return p;
}

namespace {

struct Targets {
  std::vector<double> times;  // sorted distinct
  std::vector<std::vector<int>> rows;  // indices into times per row
};

Targets make_targets(const ReconstructionPlan& plan) {
  Targets t;
  t.times = plan.times;
  for (const auto& row : plan_rows(plan)) {
    std::vector<int> idx;
    for (double s : row)
      idx.push_back(static_cast<int>(std::lower_bound(t.times.begin(), t.times.end(), s) - t.times.begin()));
    t.rows.push_back(std::move(idx));
  }
  return t;
}

struct PathOutcome {
  bool alive = true;
  std::vector<Vec> states;
  double log_weight = 0.0;
};

// One Euler-Maruyama path of `sde` from x0. Without `t`, states are recorded
// as simulated; with `t`, they are mapped back through Phi^-1, the original
// clock advances by dt / eta and the log dP/dQ of the inverse transformation
// accumulates. A state is recorded at the last node whose clock is <= target.
class Walker {
 public:
  Walker(const Sde& sde, const FiniteTransformation* t, bool time_change, bool measure_change,
         const std::vector<double>& targets, double dt, double horizon)
      : sde_(sde),
        t_(t),
        time_change_(t != nullptr && time_change),
        measure_change_(t != nullptr && measure_change),
        targets_(targets),
        dt_(dt),
        horizon_(horizon) {
    const double t_max = targets.back();
    if (!time_change_ && t_max > 0.0) grid_ = uniform_grid(t_max, dt);
    if (!time_change_ && t_max == 0.0) grid_ = {0.0};
  }

  PathOutcome run(const Vec& x0, Stream& stream) const {
    const int n = sde_.n;
    const int m = sde_.m;
    const int n0 = t_ != nullptr ? t_->phi.inverse.dim() : n;
    PathOutcome out;
    out.states.assign(targets_.size(), Vec());
    std::array<double, kMaxDim> x{};
    std::array<double, kMaxDim> xo{};
    std::array<double, kMaxDim> drift{};
    std::array<double, kMaxDim * kMaxDim> diff{};
    std::array<double, kMaxDim> noise{};
    std::array<double, kMaxDim> hv{};
    std::array<double, kMaxDim> hinv{};
    std::array<double, kMaxDim * kMaxDim> bm{};
    for (int i = 0; i < n; ++i) x[i] = x0(i);

    std::size_t pending = 0;
    double clock = 0.0;
    double run_time = 0.0;
    const bool reconstruct_each_step = time_change_ || measure_change_;
    for (long k = 0;; ++k) {
      const bool grid_end = !time_change_ && k + 1 >= static_cast<long>(grid_.size());
      const double step = time_change_ ? dt_ : (grid_end ? 0.0 : grid_[k + 1] - grid_[k]);
      bool mapped = false;
      auto map_back = [&] {
        if (mapped) return;
        if (t_ != nullptr)
          t_->phi.inverse.eval(x.data(), xo.data());
        else
          std::copy_n(x.data(), n, xo.data());
        mapped = true;
      };
      double eta = 1.0;
      if (reconstruct_each_step) {
        map_back();
        if (time_change_) {
          eta = t_->eta.eval(xo.data());
          if (!(eta > 0.0) || !std::isfinite(eta)) throw NumericError("reconstruct: bad time-change density");
        }
      }
      const double inc = time_change_ ? step / eta : step;
      while (pending < targets_.size()) {
        const double target = targets_[pending];
        const double slack = 1e-12 * std::max(1.0, target);
        if (!grid_end && clock + inc <= target + slack) break;
        map_back();
        out.states[pending] = Eigen::Map<const Vec>(xo.data(), n0);
        ++pending;
      }
      if (pending == targets_.size()) break;
      if (time_change_ && run_time >= horizon_) throw HorizonError("reconstruct: clock did not reach t_max");

      const double sq = std::sqrt(step);
      for (int a = 0; a < m; ++a) noise[a] = sq * stream.normal();
      if (measure_change_) {
        // h of the inverse transformation: -B h / sqrt(eta) on the original space.
        t_->h.eval(xo.data(), hv.data());
        t_->b.eval(xo.data(), bm.data());
        const double s = 1.0 / std::sqrt(eta);
        double dot = 0.0;
        double norm2 = 0.0;
        for (int a = 0; a < m; ++a) {
          double v = 0.0;
          for (int b = 0; b < m; ++b) v -= bm[a + b * m] * hv[b];
          hinv[a] = v * s;
          dot += hinv[a] * noise[a];
          norm2 += hinv[a] * hinv[a];
        }
        out.log_weight += dot - 0.5 * norm2 * step;
        if (!std::isfinite(out.log_weight)) throw NumericError("reconstruct: non-finite log weight");
      }
      sde_.mu.eval(x.data(), drift.data());
      sde_.sigma.eval(x.data(), diff.data());
      for (int i = 0; i < n; ++i) {
        double v = x[i] + drift[i] * step;
        for (int a = 0; a < m; ++a) v += diff[i + a * n] * noise[a];
        if (!std::isfinite(v)) throw NumericError("reconstruct: non-finite state");
        x[i] = v;
      }
      clock = time_change_ ? clock + inc : grid_[k + 1];
      run_time += step;
      if (!sde_.contains(x.data())) {
        out.alive = false;
        return out;
      }
    }
    return out;
  }

 private:
  const Sde& sde_;
  const FiniteTransformation* t_;
  bool time_change_;
  bool measure_change_;
  const std::vector<double>& targets_;
  double dt_;
  double horizon_;
  std::vector<double> grid_;
};

double mean_of(const std::vector<double>& v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - mean) * (v[i] - mean);
  return pairwise_sum(d) / static_cast<double>(v.size() - 1);
}

double effective_horizon(const ReconstructionPlan& plan) {
  return plan.reduced_horizon > 0.0 ? plan.reduced_horizon : 10.0 * std::max(plan.times.back(), plan.dt);
}

}  // namespace

double z_score(double a, double se_a, double b, double se_b) {
  const double s = std::sqrt(se_a * se_a + se_b * se_b);
  if (s > 0.0) return (a - b) / s;
  return a == b ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), a - b);
}

LegResult estimate_direct(const ReconstructionPlan& plan) {
  plan.validate();
  const Targets tg = make_targets(plan);
  const Walker walker(plan.original, nullptr, false, false, tg.times, plan.dt, 0.0);
  const auto n_paths = static_cast<std::size_t>(plan.paths);
  const std::size_t n_rows = tg.rows.size();
  std::vector<double> values(n_rows * n_paths, 0.0);
  std::vector<char> ok(n_paths, 0);
  parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
    std::vector<Vec> states;
    for (std::size_t i = begin; i < end; ++i) {
      Stream stream(plan.seed, Leg::kDirect, i);
      const PathOutcome o = walker.run(plan.x0, stream);
      if (!o.alive) continue;
      ok[i] = 1;
      for (std::size_t r = 0; r < n_rows; ++r) {
        states.clear();
        for (int j : tg.rows[r]) states.push_back(o.states[j]);
        values[r * n_paths + i] = plan.g.fn(states);
      }
    }
  });

  LegResult res;
  const auto accepted = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  res.rejected = static_cast<int>(n_paths - accepted);
  const double frac = static_cast<double>(res.rejected) / static_cast<double>(n_paths);
  if (frac > plan.rejection_cap)
    throw ReliabilityError("direct leg: rejected fraction " + std::to_string(frac) + " above cap");
  if (accepted < 2) throw ReliabilityError("direct leg: fewer than two accepted paths");
  std::vector<double> kept(accepted);
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::size_t j = 0;
    for (std::size_t i = 0; i < n_paths; ++i)
      if (ok[i]) kept[j++] = values[r * n_paths + i];
    Estimate e;
    e.value = mean_of(kept);
    e.std_error = std::sqrt(sample_variance(kept, e.value) / static_cast<double>(accepted));
    e.n_effective = static_cast<double>(accepted);
    e.rejected_frac = frac;
    res.estimates.push_back(e);
  }
  res.weights.mean = 1.0;
  res.weights.max = 1.0;
  res.weights.ess = static_cast<double>(accepted);
  return res;
}

LegResult estimate_reconstructed(const ReconstructionPlan& plan) {
  plan.validate();
  const Targets tg = make_targets(plan);
  const double horizon = effective_horizon(plan);
  const Walker walker(plan.reduced, &plan.transform, plan.time_change, plan.measure_change, tg.times,
                      plan.dt, horizon);
  const auto n_paths = static_cast<std::size_t>(plan.paths);
  const std::size_t n_rows = tg.rows.size();
  std::vector<double> gw(n_rows * n_paths, 0.0);
  std::vector<double> w(n_paths, 0.0);
  parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
    std::vector<Vec> states;
    for (std::size_t i = begin; i < end; ++i) {
      Stream stream(plan.seed, Leg::kReduced, i);
      const PathOutcome o = walker.run(plan.x0_reduced, stream);
      // Paths leaving the reduced domain carry no P-mass: weight 0, still counted.
      if (!o.alive) continue;
      const double wi = std::exp(o.log_weight);
      w[i] = wi;
      for (std::size_t r = 0; r < n_rows; ++r) {
        states.clear();
        for (int j : tg.rows[r]) states.push_back(o.states[j]);
        gw[r * n_paths + i] = plan.g.fn(states) * wi;
      }
    }
  });

  LegResult res;
  res.horizon = horizon;
  std::vector<double> w2(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    w2[i] = w[i] * w[i];
    if (w[i] == 0.0) ++res.rejected;
  }
  const double sw = pairwise_sum(w);
  const double sw2 = pairwise_sum(w2);
  const double n = static_cast<double>(n_paths);
  WeightStats& ws = res.weights;
  ws.mean = sw / n;
  ws.variance = sample_variance(w, ws.mean);
  ws.std_error = std::sqrt(ws.variance / n);
  ws.max = *std::max_element(w.begin(), w.end());
  ws.ess = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
  ws.killed = res.rejected;
  std::vector<double> col(n_paths);
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::copy_n(gw.begin() + static_cast<std::ptrdiff_t>(r * n_paths), n_paths, col.begin());
    Estimate e;
    e.value = mean_of(col);
    e.std_error = std::sqrt(sample_variance(col, e.value) / n);
    e.n_effective = ws.ess;
    e.rejected_frac = static_cast<double>(res.rejected) / n;
    res.estimates.push_back(e);
  }
  return res;
}

bool McReport::pass(double z_max) const {
  if (degenerate) return false;
  return std::all_of(rows.begin(), rows.end(), [&](const McRow& r) { return std::abs(r.z) <= z_max; });
}

McReport run_reconstruction(const ReconstructionPlan& plan) {
  plan.validate();
  const LegResult direct = estimate_direct(plan);
  ReconstructionPlan p = plan;
  p.reduced_horizon = effective_horizon(plan);
  LegResult reduced;
  for (int attempt = 0;; ++attempt) {
    try {
      reduced = estimate_reconstructed(p);
      break;
    } catch (const HorizonError&) {
      if (attempt == 4) throw;
      p.reduced_horizon *= 2.0;
    }
  }

  McReport rep;
  rep.model = plan.model;
  rep.route = plan.route;
  rep.observable = plan.g.name;
  rep.seed = plan.seed;
  rep.paths = plan.paths;
  rep.dt = plan.dt;
  rep.reduced_horizon = reduced.horizon;
  rep.weights = reduced.weights;
  rep.rejected_direct = static_cast<double>(direct.rejected) / plan.paths;
  rep.rejected_reduced = static_cast<double>(reduced.rejected) / plan.paths;
  const auto rows = plan_rows(plan);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    McRow row;
    row.times = rows[r];
    row.direct = direct.estimates[r];
    row.reconstructed = reduced.estimates[r];
    row.z = z_score(row.direct.value, row.direct.std_error, row.reconstructed.value,
                    row.reconstructed.std_error);
    if (r < plan.oracle.size() && plan.oracle[r]) {
      row.oracle = plan.oracle[r];
      row.z_direct_oracle = z_score(row.direct.value, row.direct.std_error, *row.oracle, 0.0);
      row.z_reconstructed_oracle =
          z_score(row.reconstructed.value, row.reconstructed.std_error, *row.oracle, 0.0);
    }
    rep.rows.push_back(row);
  }
  if (rep.weights.ess < 0.01 * plan.paths) {
    rep.degenerate = true;
    rep.warnings.push_back("effective sample size below 1% of paths");
  }
  return rep;
}

}  // namespace stochsym
