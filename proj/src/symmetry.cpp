#include "stochsym/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "stochsym/errors.hpp"
#include "stochsym/rng.hpp"

namespace stochsym {

double ResidualReport::value(const std::string& name) const {
  for (const auto& [k, v] : values)
    if (k == name) return v;
  throw RangeError("report has no value named " + name);
}

const EquationResidual* ResidualReport::equation(const std::string& name) const {
  for (const auto& e : equations)
    if (e.name == name) return &e;
  return nullptr;
}

namespace {

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

class Accumulator {
 public:
  explicit Accumulator(std::string op, double tol) {
    report_.op = std::move(op);
    report_.tolerance = tol;
  }

  void add(const std::string& name, double r) {
    if (!std::isfinite(r)) throw NumericError(report_.op + ": non-finite residual");
    auto it = index_.find(name);
    if (it == index_.end()) {
      it = index_.emplace(name, report_.equations.size()).first;
      report_.equations.push_back({name, 0.0, 0.0});
      counts_.push_back(0);
    }
    auto& e = report_.equations[it->second];
    e.max = std::max(e.max, r);
    e.mean += r;
    ++counts_[it->second];
    total_ += r;
    ++n_;
  }

  void point_done() { ++report_.points; }
  void skip() { ++report_.skipped; }
  void value(std::string name, double v) { report_.values.emplace_back(std::move(name), v); }

  // Runs body at each point, counting domain failures as skipped.
  template <class F>
  void each(const std::vector<Vec>& points, F&& body) {
    for (const Vec& x : points) {
      try {
        body(x);
        point_done();
      } catch (const DomainError&) {
        skip();
      }
    }
  }

  ResidualReport finish() {
    for (std::size_t i = 0; i < report_.equations.size(); ++i) {
      auto& e = report_.equations[i];
      if (counts_[i] > 0) e.mean /= counts_[i];
      report_.max_residual = std::max(report_.max_residual, e.max);
    }
    report_.mean_residual = n_ > 0 ? total_ / n_ : 0.0;
    report_.pass = report_.max_residual <= report_.tolerance && report_.points > 0;
    return report_;
  }

 private:
  ResidualReport report_;
  std::map<std::string, std::size_t> index_;
  std::vector<int> counts_;
  double total_ = 0.0;
  long n_ = 0;
};

void require_domain(const Sde& sde, const Vec& x) {
  if (!sde.contains(x)) throw DomainError("point outside the SDE domain");
}

}  // namespace

std::vector<Vec> sample_box(const Box& box, int count, std::uint64_t seed) {
  const int n = static_cast<int>(box.lo.size());
  std::vector<Vec> out;
  out.reserve(count);
  std::uint64_t attempt = 0;
  const std::uint64_t limit = 1000ULL * static_cast<std::uint64_t>(std::max(count, 1));
  while (static_cast<int>(out.size()) < count) {
    if (attempt >= limit) throw ConfigError("sample_box: acceptance region too small");
    Stream s(seed, Leg::kAux, attempt++);
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * s.uniform();
    if (!box.accept || box.accept(x.data())) out.push_back(std::move(x));
  }
  return out;
}

ResidualReport check_finite_symmetry(const FiniteTransformation& t, const Sde& sde,
                                     const std::vector<Vec>& points, double tol) {
  Accumulator acc("finite_symmetry", tol);
  const Sde e = transform_sde(t, sde);
  acc.each(points, [&](const Vec& x) {
    require_domain(sde, x);
    acc.add("drift", (e.mu(x) - sde.mu(x)).lpNorm<Eigen::Infinity>());
    acc.add("diffusion", max_abs(e.sigma(x) - sde.sigma(x)));
  });
  return acc.finish();
}

Vec determining_residual_drift(const InfinitesimalTransformation& v, const Sde& sde, const Vec& x) {
  const Vec mu = sde.mu(x);
  const Mat s = sde.sigma(x);
  const Vec y = v.y(x);
  const Mat jy = v.y.jacobian(x);
  const std::vector<Mat> hy = v.y.hessians(x);
  const Mat a = s * s.transpose();
  Vec ly(sde.n);
  for (int k = 0; k < sde.n; ++k) ly[k] = 0.5 * a.cwiseProduct(hy[k]).sum() + jy.row(k).dot(mu);
  return sde.mu.jacobian(x) * y - ly - s * v.hh(x) + v.tau(x) * mu;
}

Mat determining_residual_diffusion(const InfinitesimalTransformation& v, const Sde& sde,
                                   const Vec& x) {
  const Mat s = sde.sigma(x);
  const Vec y = v.y(x);
  return sde.sigma.directional(x, y) - v.y.jacobian(x) * s + 0.5 * v.tau(x) * s + s * v.c(x);
}

ResidualReport check_determining_equations(const InfinitesimalTransformation& v, const Sde& sde,
                                           const std::vector<Vec>& points, double tol) {
  Accumulator acc("determining_equations", tol);
  acc.each(points, [&](const Vec& x) {
    require_domain(sde, x);
    acc.add("drift", determining_residual_drift(v, sde, x).lpNorm<Eigen::Infinity>());
    acc.add("diffusion", max_abs(determining_residual_diffusion(v, sde, x)));
  });
  return acc.finish();
}

ResidualReport check_lemma_identities(const InfinitesimalTransformation& v, const Sde& sde,
                                      const ScalarField& f, const std::vector<Vec>& points,
                                      double tol) {
  const int n = sde.n;
  Accumulator acc("lemma_identities", tol);
  const ScalarField lf(Field(
      n, 1, 1,
      [sde, f, n](const double* xp, double* out) {
        out[0] = generator_apply(sde, f, Eigen::Map<const Vec>(xp, n));
      },
      std::max(f.field().derived_level(2), v.y.field().fd_level())));
  const ScalarField yf(Field(
      n, 1, 1,
      [v, f, n](const double* xp, double* out) {
        const Vec x = Eigen::Map<const Vec>(xp, n);
        out[0] = f.gradient(x).dot(v.y(x));
      },
      std::max(f.field().derived_level(1), v.y.field().fd_level())));
  acc.each(points, [&](const Vec& x) {
    require_domain(sde, x);
    const Vec y = v.y(x);
    const Mat s = sde.sigma(x);
    const Vec grad = f.gradient(x);
    const double l = lf(x);
    const double lhs1 = lf.directional(x, y) - generator_apply(sde, yf, x);
    const double rhs1 = -v.tau(x) * l + grad.dot(s * v.hh(x));
    acc.add("generator_commutator", std::abs(lhs1 - rhs1));
    const Vec sg = s.transpose() * grad;
    const Vec lhs2 = sde.sigma.directional(x, y).transpose() * grad;
    const Vec rhs2 = s.transpose() * v.y.jacobian(x).transpose() * grad - 0.5 * v.tau(x) * sg +
                     v.c(x) * sg;
    acc.add("diffusion_gradient", (lhs2 - rhs2).lpNorm<Eigen::Infinity>());
  });
  return acc.finish();
}

double doob_g(const Sde& sde, const ScalarField& frak_h, const Vec& x) {
  const Vec grad = frak_h.gradient(x);
  const Mat s = sde.sigma(x);
  const double lh = generator_from_derivatives(sde.mu(x), s, grad, frak_h.hessian(x));
  return 0.5 * (s.transpose() * grad).squaredNorm() + lh;
}

ResidualReport check_quasi_doob(const VectorField& h, const ScalarField& frak_h, const Sde& sde,
                                const std::vector<Vec>& points, double tol) {
  Accumulator acc("quasi_doob", tol);
  double g_min = std::numeric_limits<double>::infinity();
  double g_max = -std::numeric_limits<double>::infinity();
  double g_abs = 0.0;
  acc.each(points, [&](const Vec& x) {
    require_domain(sde, x);
    const Vec hx = h(x);
    const Vec grad = frak_h.gradient(x);
    const Mat s = sde.sigma(x);
    acc.add("potential", (hx - s.transpose() * grad).lpNorm<Eigen::Infinity>());
    const double lh = generator_from_derivatives(sde.mu(x), s, grad, frak_h.hessian(x));
    const double g = doob_g(sde, frak_h, x);
    acc.add("compatibility", std::abs(0.5 * hx.squaredNorm() - (g - lh)));
    g_min = std::min(g_min, g);
    g_max = std::max(g_max, g);
    g_abs = std::max(g_abs, std::abs(g));
  });
  acc.value("g_min", g_min);
  acc.value("g_max", g_max);
  acc.value("doob", g_abs <= tol ? 1.0 : 0.0);
  return acc.finish();
}

namespace {

// Flattened (Y, C, tau, H) at x.
Vec stack(const InfinitesimalTransformation& v, const Vec& x) {
  const int n = v.n();
  const int m = v.m();
  Vec out(n + m * m + 1 + m);
  out.head(n) = v.y(x);
  const Mat c = v.c(x);
  out.segment(n, m * m) = Eigen::Map<const Vec>(c.data(), m * m);
  out[n + m * m] = v.tau(x);
  out.tail(m) = v.hh(x);
  return out;
}

}  // namespace

ResidualReport check_algebra_closure(const std::vector<InfinitesimalTransformation>& vs,
                                     const Sde& sde, const std::vector<Vec>& points, double tol,
                                     std::vector<Mat>* constants) {
  Accumulator acc("algebra_closure", tol);
  const int r = static_cast<int>(vs.size());
  std::vector<Mat> e(r, Mat::Zero(r, r));
  std::vector<Vec> usable;
  for (const Vec& x : points) {
    if (sde.contains(x)) usable.push_back(x);
    else acc.skip();
  }
  for (const Vec& x : usable) {
    (void)x;
    acc.point_done();
  }
  if (r >= 2 && !usable.empty()) {
    const int width = vs[0].n() + vs[0].m() * vs[0].m() + 1 + vs[0].m();
    const int rows = width * static_cast<int>(usable.size());
    Mat basis(rows, r);
    for (std::size_t p = 0; p < usable.size(); ++p)
      for (int k = 0; k < r; ++k) basis.block(p * width, k, width, 1) = stack(vs[k], usable[p]);
    const Eigen::ColPivHouseholderQR<Mat> qr(basis);
    for (int i = 0; i < r; ++i) {
      for (int j = i + 1; j < r; ++j) {
        const InfinitesimalTransformation b = lie_bracket(vs[i], vs[j]);
        Vec rhs(rows);
        for (std::size_t p = 0; p < usable.size(); ++p) {
          const Vec& x = usable[p];
          rhs.segment(p * width, width) = stack(b, x);
          acc.add("bracket_drift", determining_residual_drift(b, sde, x).lpNorm<Eigen::Infinity>());
          acc.add("bracket_diffusion", max_abs(determining_residual_diffusion(b, sde, x)));
          if (b.k) {
            const Vec diff = b.hh(x) - sde.sigma(x).transpose() * b.k->gradient(x);
            acc.add("bracket_quasi_doob", diff.lpNorm<Eigen::Infinity>());
          }
        }
        const Vec coef = qr.solve(rhs);
        acc.add("structure_fit", (basis * coef - rhs).lpNorm<Eigen::Infinity>());
        for (int k = 0; k < r; ++k) {
          e[k](i, j) = coef[k];
          e[k](j, i) = -coef[k];
          acc.value("e^" + std::to_string(k + 1) + "_" + std::to_string(i + 1) +
                        std::to_string(j + 1),
                    coef[k]);
        }
      }
    }
  }
  if (constants != nullptr) *constants = e;
  return acc.finish();
}

ResidualReport check_straightening(const FiniteTransformation& t,
                                   const std::vector<InfinitesimalTransformation>& vs,
                                   const std::vector<Vec>& points, double tol, const Sde* sde,
                                   const std::optional<ScalarField>& t_potential) {
  Accumulator acc("straightening", tol);
  const int m = t.m();
  std::vector<InfinitesimalTransformation> pushed;
  for (const auto& v : vs) pushed.push_back(pushforward(t, v));
  std::vector<std::optional<ScalarField>> qd(vs.size());
  if (sde != nullptr && t_potential) {
    const ScalarField kbar = *t_potential;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (!vs[i].k) continue;
      const auto v = vs[i];
      const int n = v.n();
      qd[i] = ScalarField(Field(
          n, 1, 1,
          [v, kbar, n](const double* xp, double* out) {
            const Vec x = Eigen::Map<const Vec>(xp, n);
            out[0] = kbar.directional(x, v.y(x)) + (*v.k)(x);
          },
          std::max(kbar.field().derived_level(1), v.k->field().fd_level())));
    }
  }
  acc.each(points, [&](const Vec& x) {
    if (sde != nullptr) require_domain(*sde, x);
    const Mat b = t.b(x);
    const double eta = t.eta(x);
    const Vec h = t.h(x);
    const Vec xp = t.phi.forward(x);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const auto& v = vs[i];
      const Vec y = v.y(x);
      const Mat c = v.c(x);
      const double tau = v.tau(x);
      acc.add("rotation", max_abs(t.b.directional(x, y) + b * c));
      acc.add("density", std::abs(t.eta.directional(x, y) + tau * eta));
      const Mat a = -0.5 * tau * Mat::Identity(m, m) + c;
      acc.add("girsanov", (t.h.directional(x, y) - a * h + v.hh(x)).lpNorm<Eigen::Infinity>());
      const auto& p = pushed[i];
      const double strong = std::max({max_abs(p.c(xp)), std::abs(p.tau(xp)),
                                      p.hh(xp).lpNorm<Eigen::Infinity>()});
      acc.add("strong", strong);
      if (qd[i]) {
        const Vec g = sde->sigma(x).transpose() * qd[i]->gradient(x);
        acc.add("quasi_doob_potential", g.lpNorm<Eigen::Infinity>());
      }
    }
  });
  return acc.finish();
}

ResidualReport check_triangular(const Sde& sde, int r, const std::vector<Vec>& points, double tol) {
  const int n = sde.n;
  const int m = sde.m;
  if (r < 1 || r >= n) throw ConfigError("check_triangular: need 1 <= r < n");
  Accumulator acc("triangular", tol);
  acc.each(points, [&](const Vec& x) {
    require_domain(sde, x);
    const Vec mu = sde.mu(x);
    const Mat s = sde.sigma(x);
    const Mat jmu = sde.mu.jacobian(x);
    const std::vector<Mat> ds = sde.sigma.partials(x);
    double reduced = 0.0;
    double triangular = 0.0;
    for (int j = 0; j < n; ++j) {
      // 1-based row j+1; forbidden coordinates are 1..r below the block and
      // 1..j+1 inside it.
      const int last = j + 1 > r ? r : j + 1;
      double worst = 0.0;
      for (int i = 0; i < last; ++i) {
        worst = std::max(worst, std::abs(jmu(j, i)) / (1.0 + std::abs(mu[j])));
        for (int a = 0; a < m; ++a)
          worst = std::max(worst, std::abs(ds[i](j, a)) / (1.0 + std::abs(s(j, a))));
      }
      if (j + 1 > r) reduced = std::max(reduced, worst);
      else triangular = std::max(triangular, worst);
    }
    acc.add("reducible", reduced);
    acc.add("triangular", triangular);
  });
  return acc.finish();
}

}  // namespace stochsym
