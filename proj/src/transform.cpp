#include "stochsym/transform.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "stochsym/errors.hpp"

namespace stochsym {

namespace {

using Map = Eigen::Map<const Vec>;

int level_of(std::initializer_list<int> levels) { return std::max(levels); }

Vec at(const double* x, int n) { return Map(x, n); }

void write(const Vec& v, double* out) { std::copy(v.data(), v.data() + v.size(), out); }
void write(const Mat& v, double* out) { std::copy(v.data(), v.data() + v.size(), out); }

}  // namespace

FiniteTransformation identity_transformation(int n, int m) {
  FiniteTransformation t;
  t.phi.forward = VectorField::identity(n);
  t.phi.inverse = VectorField::identity(n);
  t.b = MatrixField::identity(n, m);
  t.eta = ScalarField::constant(n, 1.0);
  t.h = VectorField::zero(n, m);
  return t;
}

InfinitesimalTransformation zero_infinitesimal(int n, int m) {
  return strong_infinitesimal(VectorField::zero(n, n), m);
}

InfinitesimalTransformation strong_infinitesimal(VectorField y, int m) {
  const int n = y.in_dim();
  InfinitesimalTransformation v;
  v.y = std::move(y);
  v.c = MatrixField::constant(Mat::Zero(m, m), n);
  v.tau = ScalarField::constant(n, 0.0);
  v.hh = VectorField::zero(n, m);
  return v;
}

Field compose_fields(const Field& outer, const VectorField& inner) {
  if (outer.in_dim() != inner.dim()) throw ConfigError("compose: dimension mismatch");
  const int n = inner.in_dim();
  Field f(
      n, outer.rows(), outer.cols(),
      [outer, inner](const double* x, double* out) {
        std::array<double, kMaxDim> y{};
        inner.eval(x, y.data());
        outer.eval(y.data(), out);
      },
      level_of({outer.fd_level(), inner.field().fd_level()}));
  if (!outer.has_derivatives() || !inner.field().has_derivatives()) return f;
  return f.with_derivatives([outer, inner, n](const double* xp, double* jac, double* hess) {
    const Vec x = at(xp, n);
    const Vec y = inner(x);
    const Mat j1 = inner.jacobian(x);
    const Mat j2 = outer.jacobian(y);
    const int p = outer.size();
    if (jac != nullptr) write(Mat(j2 * j1), jac);
    if (hess != nullptr) {
      const std::vector<Mat> h1 = inner.hessians(x);
      const std::vector<Mat> h2 = outer.hessians(y);
      for (int k = 0; k < p; ++k) {
        Mat hk = j1.transpose() * h2[k] * j1;
        for (int l = 0; l < static_cast<int>(h1.size()); ++l) hk += j2(k, l) * h1[l];
        write(hk, hess + k * n * n);
      }
    }
  });
}

GroupElement evaluate(const FiniteTransformation& t, const Vec& x) {
  return {t.phi.forward(x), t.b(x), t.eta(x), t.h(x)};
}

Sde transform_sde(const FiniteTransformation& t, const Sde& sde, Domain image) {
  const int n = sde.n;
  const int m = sde.m;
  if (t.n() != n || t.m() != m) throw ConfigError("transform_sde: dimension mismatch");
  const VectorField fwd = t.phi.forward;
  const VectorField inv = t.phi.inverse;

  auto source_point = [inv, sde](const double* xp) {
    Vec x = inv(at(xp, sde.n));
    if (!x.allFinite()) throw NumericError("transform_sde: non-finite inverse");
    if (!sde.contains(x)) throw DomainError("transform_sde: preimage outside source domain");
    return x;
  };

  const int mu_level = level_of({fwd.field().derived_level(2), inv.field().fd_level(),
                                 sde.mu.field().fd_level(), sde.sigma.field().fd_level(),
                                 t.eta.field().fd_level(), t.h.field().fd_level()});
  Field mu(
      n, n, 1,
      [source_point, fwd, sde, t, n](const double* xp, double* out) {
        const Vec x = source_point(xp);
        const Mat jac = fwd.jacobian(x);
        const std::vector<Mat> hess = fwd.hessians(x);
        const Vec mu0 = sde.mu(x);
        const Mat s = sde.sigma(x);
        const Mat a = s * s.transpose();
        Vec lphi(n);
        for (int k = 0; k < n; ++k) lphi[k] = 0.5 * a.cwiseProduct(hess[k]).sum() + jac.row(k).dot(mu0);
        write(Vec((lphi + jac * s * t.h(x)) / t.eta(x)), out);
      },
      mu_level);

  const int sigma_level = level_of({fwd.field().derived_level(1), inv.field().fd_level(),
                                    sde.sigma.field().fd_level(), t.b.field().fd_level(),
                                    t.eta.field().fd_level()});
  Field sigma(
      n, n, m,
      [source_point, fwd, sde, t](const double* xp, double* out) {
        const Vec x = source_point(xp);
        write(Mat(fwd.jacobian(x) * sde.sigma(x) * t.b(x).transpose() / std::sqrt(t.eta(x))), out);
      },
      sigma_level);

  if (!image) {
    image = [inv, sde](const double* xp) {
      try {
        const Vec x = inv(at(xp, sde.n));
        return x.allFinite() && sde.contains(x);
      } catch (const Error&) {
        return false;
      }
    };
  }
  return make_sde(VectorField(mu), MatrixField(sigma), std::move(image));
}

DiscretePath transform_path(const FiniteTransformation& t, const DiscretePath& path, const Sde& sde) {
  if (path.dim() != sde.n || path.noise_dim() != sde.m || t.n() != sde.n || t.m() != sde.m)
    throw ConfigError("transform_path: dimension mismatch");
  const int k_max = path.steps();
  const int m = sde.m;
  DiscretePath out;
  out.times = path.times;
  out.rejected = path.rejected;
  out.rejected_at = path.rejected_at;
  out.states.resize(t.phi.forward.dim(), k_max + 1);
  out.dw.resize(m, k_max);
  out.clock.assign(k_max + 1, 0.0);
  out.log_weight.assign(k_max + 1, 0.0);
  const double w0 = path.log_weight.empty() ? 0.0 : path.log_weight[0];
  out.log_weight[0] = w0;
  double extra = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    const Vec x = path.state(k);
    out.states.col(k) = t.phi.forward(x);
    if (k == k_max) break;
    const double dc = path.clock[k + 1] - path.clock[k];
    const double eta = t.eta(x);
    if (!(eta > 0.0)) throw DomainError("transform_path: density must be positive");
    const Vec h = t.h(x);
    const Vec dw = path.dw.col(k);
    out.dw.col(k) = std::sqrt(eta) * t.b(x) * (dw - h * dc);
    out.clock[k + 1] = out.clock[k] + eta * dc;
    extra += h.dot(dw) - 0.5 * h.squaredNorm() * dc;
    const double base = path.log_weight.empty() ? 0.0 : path.log_weight[k + 1];
    out.log_weight[k + 1] = base + extra;
  }
  return out;
}

FiniteTransformation compose(const FiniteTransformation& t2, const FiniteTransformation& t1) {
  if (t2.n() != t1.phi.forward.dim() || t2.m() != t1.m())
    throw ConfigError("compose: dimension mismatch");
  const int n = t1.n();
  const int m = t1.m();
  FiniteTransformation t;
  t.phi.forward = VectorField(compose_fields(t2.phi.forward.field(), t1.phi.forward));
  t.phi.inverse = VectorField(compose_fields(t1.phi.inverse.field(), t2.phi.inverse));
  const VectorField p1 = t1.phi.forward;

  t.b = MatrixField(Field(
      n, m, m,
      [t1, t2, p1, n](const double* xp, double* out) {
        const Vec x = at(xp, n);
        write(Mat(t2.b(p1(x)) * t1.b(x)), out);
      },
      level_of({t1.b.field().fd_level(), t2.b.field().fd_level(), p1.field().fd_level()})));
  t.eta = ScalarField(Field(
      n, 1, 1,
      [t1, t2, p1, n](const double* xp, double* out) {
        const Vec x = at(xp, n);
        out[0] = t2.eta(p1(x)) * t1.eta(x);
      },
      level_of({t1.eta.field().fd_level(), t2.eta.field().fd_level(), p1.field().fd_level()})));
  t.h = VectorField(Field(
      n, m, 1,
      [t1, t2, p1, n](const double* xp, double* out) {
        const Vec x = at(xp, n);
        write(Vec(std::sqrt(t1.eta(x)) * t1.b(x).transpose() * t2.h(p1(x)) + t1.h(x)), out);
      },
      level_of({t1.h.field().fd_level(), t2.h.field().fd_level(), t1.b.field().fd_level(),
                t1.eta.field().fd_level(), p1.field().fd_level()})));
  return t;
}

FiniteTransformation invert(const FiniteTransformation& t) {
  const int n = t.phi.forward.dim();
  const int m = t.m();
  const VectorField inv = t.phi.inverse;
  FiniteTransformation r;
  r.phi.forward = t.phi.inverse;
  r.phi.inverse = t.phi.forward;
  const int base = inv.field().fd_level();
  r.b = MatrixField(Field(
      n, m, m,
      [t, inv, n](const double* xp, double* out) {
        write(Mat(t.b(inv(at(xp, n))).transpose()), out);
      },
      level_of({base, t.b.field().fd_level()})));
  r.eta = ScalarField(Field(
      n, 1, 1, [t, inv, n](const double* xp, double* out) { out[0] = 1.0 / t.eta(inv(at(xp, n))); },
      level_of({base, t.eta.field().fd_level()})));
  r.h = VectorField(Field(
      n, m, 1,
      [t, inv, n](const double* xp, double* out) {
        const Vec y = inv(at(xp, n));
        write(Vec(-t.b(y) * t.h(y) / std::sqrt(t.eta(y))), out);
      },
      level_of({base, t.b.field().fd_level(), t.eta.field().fd_level(), t.h.field().fd_level()})));
  return r;
}

InfinitesimalTransformation pushforward(const FiniteTransformation& t,
                                        const InfinitesimalTransformation& v) {
  const int n = t.n();
  const int m = t.m();
  if (v.n() != n || v.m() != m) throw ConfigError("pushforward: dimension mismatch");
  const VectorField fwd = t.phi.forward;
  const VectorField inv = t.phi.inverse;
  const int base = level_of({inv.field().fd_level(), v.y.field().fd_level()});
  InfinitesimalTransformation r;
  r.y = VectorField(Field(
      n, n, 1,
      [fwd, inv, v, n](const double* xp, double* out) {
        const Vec x = inv(at(xp, n));
        write(Vec(fwd.jacobian(x) * v.y(x)), out);
      },
      level_of({base, fwd.field().derived_level(1)})));
  r.c = MatrixField(Field(
      n, m, m,
      [t, inv, v, n](const double* xp, double* out) {
        const Vec x = inv(at(xp, n));
        const Mat b = t.b(x);
        write(Mat(b * v.c(x) * b.transpose() + t.b.directional(x, v.y(x)) * b.transpose()), out);
      },
      level_of({base, v.c.field().fd_level(), t.b.field().derived_level(1)})));
  r.tau = ScalarField(Field(
      n, 1, 1,
      [t, inv, v, n](const double* xp, double* out) {
        const Vec x = inv(at(xp, n));
        out[0] = v.tau(x) + t.eta.directional(x, v.y(x)) / t.eta(x);
      },
      level_of({base, v.tau.field().fd_level(), t.eta.field().derived_level(1)})));
  r.hh = VectorField(Field(
      n, m, 1,
      [t, inv, v, n, m](const double* xp, double* out) {
        const Vec x = inv(at(xp, n));
        const Mat b = t.b(x);
        const Mat a = -0.5 * v.tau(x) * Mat::Identity(m, m) + v.c(x);
        const Vec inner = -a * t.h(x) + v.hh(x) + t.h.directional(x, v.y(x));
        write(Vec(b * inner / std::sqrt(t.eta(x))), out);
      },
      level_of({base, v.tau.field().fd_level(), v.c.field().fd_level(), v.hh.field().fd_level(),
                t.b.field().fd_level(), t.h.field().derived_level(1)})));
  return r;
}

InfinitesimalTransformation lie_bracket(const InfinitesimalTransformation& v1,
                                        const InfinitesimalTransformation& v2) {
  const int n = v1.n();
  const int m = v1.m();
  if (v2.n() != n || v2.m() != m) throw ConfigError("lie_bracket: dimension mismatch");
  const int yl = level_of({v1.y.field().derived_level(1), v2.y.field().derived_level(1)});
  InfinitesimalTransformation r;
  r.y = VectorField(Field(
      n, n, 1,
      [v1, v2, n](const double* xp, double* out) {
        const Vec x = at(xp, n);
        write(Vec(v2.y.jacobian(x) * v1.y(x) - v1.y.jacobian(x) * v2.y(x)), out);
      },
      yl));
  r.c = MatrixField(Field(
      n, m, m,
      [v1, v2, n](const double* xp, double* out) {
        const Vec x = at(xp, n);
        const Mat c1 = v1.c(x);
        const Mat c2 = v2.c(x);
        write(Mat(v2.c.directional(x, v1.y(x)) - v1.c.directional(x, v2.y(x)) - (c1 * c2 - c2 * c1)),
              out);
      },
      level_of({yl, v1.c.field().derived_level(1), v2.c.field().derived_level(1)})));
  r.tau = ScalarField(Field(
      n, 1, 1,
      [v1, v2, n](const double* xp, double* out) {
        const Vec x = at(xp, n);
        out[0] = v2.tau.directional(x, v1.y(x)) - v1.tau.directional(x, v2.y(x));
      },
      level_of({yl, v1.tau.field().derived_level(1), v2.tau.field().derived_level(1)})));
  r.hh = VectorField(Field(
      n, m, 1,
      [v1, v2, n, m](const double* xp, double* out) {
        const Vec x = at(xp, n);
        const Mat id = Mat::Identity(m, m);
        const Mat a1 = -0.5 * v1.tau(x) * id + v1.c(x);
        const Mat a2 = -0.5 * v2.tau(x) * id + v2.c(x);
        write(Vec(v2.hh.directional(x, v1.y(x)) - v1.hh.directional(x, v2.y(x)) - a1 * v2.hh(x) +
                  a2 * v1.hh(x)),
              out);
      },
      level_of({yl, v1.hh.field().derived_level(1), v2.hh.field().derived_level(1)})));
  if (v1.k && v2.k) {
    const ScalarField k1 = *v1.k;
    const ScalarField k2 = *v2.k;
    r.k = ScalarField(Field(
        n, 1, 1,
        [v1, v2, k1, k2, n](const double* xp, double* out) {
          const Vec x = at(xp, n);
          out[0] = k2.directional(x, v1.y(x)) - k1.directional(x, v2.y(x));
        },
        level_of({yl, k1.field().derived_level(1), k2.field().derived_level(1)})));
  }
  return r;
}

int flow_steps(double a) { return std::max(8, static_cast<int>(std::ceil(64.0 * std::abs(a)))); }

namespace {

void check_finite(const Vec& v) {
  if (!v.allFinite()) throw DomainError("flow left the region where the field is defined");
}

}  // namespace

Vec flow_point(const VectorField& y, double a, const Vec& x, int steps) {
  Vec p = x;
  const double s = a / steps;
  for (int i = 0; i < steps; ++i) {
    const Vec k1 = y(p);
    const Vec k2 = y(p + 0.5 * s * k1);
    const Vec k3 = y(p + 0.5 * s * k2);
    const Vec k4 = y(p + s * k3);
    p += s / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(p);
  }
  return p;
}

GroupElement one_parameter_group(const InfinitesimalTransformation& v, double a, const Vec& x) {
  const int n = v.n();
  const int m = v.m();
  const int size = n + m * m + 1 + m;
  auto rhs = [&](const Vec& s) {
    Vec d(size);
    const Vec p = s.head(n);
    const Eigen::Map<const Mat> b(s.data() + n, m, m);
    const double eta = s[n + m * m];
    d.head(n) = v.y(p);
    Eigen::Map<Mat>(d.data() + n, m, m) = v.c(p) * b;
    d[n + m * m] = v.tau(p) * eta;
    d.tail(m) = std::sqrt(eta) * b.transpose() * v.hh(p);
    return d;
  };
  Vec s = Vec::Zero(size);
  s.head(n) = x;
  Eigen::Map<Mat>(s.data() + n, m, m).setIdentity();
  s[n + m * m] = 1.0;
  const int steps = flow_steps(a);
  const double hstep = a / steps;
  for (int i = 0; i < steps; ++i) {
    const Vec k1 = rhs(s);
    const Vec k2 = rhs(s + 0.5 * hstep * k1);
    const Vec k3 = rhs(s + 0.5 * hstep * k2);
    const Vec k4 = rhs(s + hstep * k3);
    s += hstep / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(s);
  }
  GroupElement g;
  g.phi = s.head(n);
  g.b = Eigen::Map<const Mat>(s.data() + n, m, m);
  g.eta = s[n + m * m];
  g.h = s.tail(m);
  return g;
}

FiniteTransformation flow_transformation(const InfinitesimalTransformation& v, double a) {
  const int n = v.n();
  const int m = v.m();
  FiniteTransformation t;
  const VectorField y = v.y;
  t.phi.forward = VectorField(Field(n, n, 1, [y, a, n](const double* xp, double* out) {
    write(flow_point(y, a, at(xp, n), flow_steps(a)), out);
  }));
  t.phi.inverse = VectorField(Field(n, n, 1, [y, a, n](const double* xp, double* out) {
    write(flow_point(y, -a, at(xp, n), flow_steps(a)), out);
  }));
  t.b = MatrixField(Field(n, m, m, [v, a, n](const double* xp, double* out) {
    write(one_parameter_group(v, a, at(xp, n)).b, out);
  }));
  t.eta = ScalarField(Field(n, 1, 1, [v, a, n](const double* xp, double* out) {
    out[0] = one_parameter_group(v, a, at(xp, n)).eta;
  }));
  t.h = VectorField(Field(n, m, 1, [v, a, n](const double* xp, double* out) {
    write(one_parameter_group(v, a, at(xp, n)).h, out);
  }));
  return t;
}

namespace {

struct CanonicalFrame {
  std::vector<VectorField> fields;
  Vec base;

  // Phi^1_{a_1} o ... o Phi^n_{a_n}(base): the innermost flow is the last field.
  Vec apply(const Vec& a, const std::vector<int>& steps) const {
    Vec p = base;
    for (int i = static_cast<int>(fields.size()) - 1; i >= 0; --i)
      p = flow_point(fields[i], a[i], p, steps[i]);
    return p;
  }

  std::vector<int> steps_for(const Vec& a) const {
    std::vector<int> s(a.size());
    for (int i = 0; i < a.size(); ++i) s[i] = flow_steps(a[i]);
    return s;
  }

  Vec solve(const Vec& x) const {
    const int n = static_cast<int>(base.size());
    Vec a = Vec::Zero(n);
    const double tol = 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>());
    int iterations = 0;
    for (int pass = 0; pass < 4; ++pass) {
      const std::vector<int> steps = steps_for(a);
      Vec r = apply(a, steps) - x;
      while (r.lpNorm<Eigen::Infinity>() > tol) {
        if (++iterations > 50) throw SingularMapError("canonical map: Newton did not converge");
        Mat jac(n, n);
        for (int j = 0; j < n; ++j) {
          const double h = 1e-6 * std::max(1.0, std::abs(a[j]));
          Vec ap = a, am = a;
          ap[j] += h;
          am[j] -= h;
          jac.col(j) = (apply(ap, steps) - apply(am, steps)) / (2.0 * h);
        }
        const Eigen::FullPivLU<Mat> lu(jac);
        if (!lu.isInvertible()) throw SingularMapError("canonical map: singular Jacobian");
        const Vec delta = lu.solve(r);
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k) {
          const Vec trial = a - lambda * delta;
          Vec rt;
          try {
            rt = apply(trial, steps) - x;
          } catch (const DomainError&) {
            lambda *= 0.5;
            continue;
          }
          if (rt.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>()) {
            a = trial;
            r = rt;
            accepted = true;
            break;
          }
          lambda *= 0.5;
        }
        if (!accepted) break;
      }
      if (r.lpNorm<Eigen::Infinity>() > tol)
        throw SingularMapError("canonical map: Newton stalled");
      if (steps_for(a) == steps) return a;
    }
    return a;
  }
};

}  // namespace

Diffeomorphism canonical_map(const std::vector<VectorField>& fields, const Vec& base) {
  const int n = static_cast<int>(base.size());
  const int r = static_cast<int>(fields.size());
  if (r < 1 || r > n) throw ConfigError("canonical map: need 1 <= r <= n fields");
  auto frame = std::make_shared<CanonicalFrame>();
  frame->fields = fields;
  frame->base = base;

  // Complete with the coordinate direction of largest residual after
  // projecting out the current span.
  Mat span(n, r);
  for (int i = 0; i < r; ++i) span.col(i) = fields[i](base);
  for (int extra = r; extra < n; ++extra) {
    const Eigen::HouseholderQR<Mat> qr(span);
    const Mat q = Mat(qr.householderQ()).leftCols(span.cols());
    int best = 0;
    double best_norm = -1.0;
    for (int j = 0; j < n; ++j) {
      Vec e = Vec::Unit(n, j);
      const double norm = (e - q * (q.transpose() * e)).norm();
      if (norm > best_norm) {
        best_norm = norm;
        best = j;
      }
    }
    frame->fields.push_back(VectorField::constant(Vec::Unit(n, best), n));
    span.conservativeResize(n, extra + 1);
    span.col(extra) = Vec::Unit(n, best);
  }
  if (Eigen::FullPivLU<Mat>(span).rank() < n)
    throw SingularMapError("canonical map: fields are not independent at base");

  Diffeomorphism d;
  d.inverse = VectorField(Field(n, n, 1, [frame, n](const double* ap, double* out) {
    const Vec a = at(ap, n);
    write(frame->apply(a, frame->steps_for(a)), out);
  }));
  d.forward = VectorField(Field(n, n, 1, [frame, n](const double* xp, double* out) {
    write(frame->solve(at(xp, n)), out);
  }));
  return d;
}

}  // namespace stochsym
