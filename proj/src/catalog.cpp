#include "stochsym/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "stochsym/errors.hpp"

namespace stochsym {

Derivatives parse_derivatives(const std::string& s) {
  if (s == "fd") return Derivatives::kFiniteDifference;
  if (s == "analytic") return Derivatives::kAnalytic;
  throw ConfigError("unknown derivative mode: " + s);
}

std::string to_string(Derivatives d) {
  return d == Derivatives::kAnalytic ? "analytic" : "fd";
}

double CatalogEntry::param(const std::string& name) const {
  for (const auto& [k, v] : params)
    if (k == name) return v;
  throw ConfigError("model " + id + " has no parameter " + name);
}

const Route& CatalogEntry::route(const std::string& rid) const {
  const std::string& want = rid.empty() ? default_route : rid;
  for (const auto& r : routes)
    if (r.id == want) return r;
  throw ConfigError("model " + id + " has no route " + want);
}

std::vector<InfinitesimalTransformation> CatalogEntry::route_symmetries(const Route& r) const {
  std::vector<InfinitesimalTransformation> out;
  for (int i : r.symmetries) out.push_back(symmetries.at(i));
  return out;
}

const std::vector<std::string>& model_ids() {
  static const std::vector<std::string> ids = {"bessel", "cir", "ou", "twod"};
  return ids;
}

Params default_params(const std::string& id) {
  if (id == "bessel") return {{"a", 1.0}};
  if (id == "cir") return {{"a", -1.0}, {"b", 1.0}, {"sigma0", 0.5}, {"k", 0.0}};
  if (id == "ou") return {{"a", -1.0}, {"b", 0.5}, {"c", 0.0}};
  if (id == "twod") return {{"alpha", 0.5}};
  throw ConfigError("unknown model: " + id);
}

namespace {

// Small builders over make_field for closed forms written as generic code.
class Builder {
 public:
  Builder(int n, Derivatives d) : n_(n), analytic_(d == Derivatives::kAnalytic) {}

  template <class Fn>
  ScalarField scalar(Fn fn) const {
    return ScalarField(make_field(n_, 1, 1, fn, analytic_));
  }
  template <class Fn>
  VectorField vector(int dim, Fn fn) const {
    return VectorField(make_field(n_, dim, 1, fn, analytic_));
  }
  // fn fills a column-major rows x cols array.
  template <class Fn>
  MatrixField matrix(int rows, int cols, Fn fn) const {
    return MatrixField(make_field(n_, rows, cols, fn, analytic_));
  }
  ScalarField zero_scalar() const {
    return scalar([](const auto*, auto* out) { out[0] = 0.0; });
  }
  MatrixField zero_rotation(int m) const {
    return matrix(m, m, [m](const auto*, auto* out) {
      for (int i = 0; i < m * m; ++i) out[i] = 0.0;
    });
  }
  MatrixField identity_rotation(int m) const {
    return matrix(m, m, [m](const auto*, auto* out) {
      for (int i = 0; i < m * m; ++i) out[i] = (i % (m + 1) == 0) ? 1.0 : 0.0;
    });
  }
  VectorField zero_vector(int dim) const {
    return vector(dim, [dim](const auto*, auto* out) {
      for (int i = 0; i < dim; ++i) out[i] = 0.0;
    });
  }
  ScalarField one() const {
    return scalar([](const auto*, auto* out) { out[0] = 1.0; });
  }

  InfinitesimalTransformation infinitesimal(VectorField y, MatrixField c, ScalarField tau,
                                            VectorField hh, std::optional<ScalarField> k) const {
    InfinitesimalTransformation v;
    v.y = std::move(y);
    v.c = std::move(c);
    v.tau = std::move(tau);
    v.hh = std::move(hh);
    v.k = std::move(k);
    return v;
  }

 private:
  int n_;
  bool analytic_;
};

Params merge(const std::string& id, const std::map<std::string, double>& overrides) {
  Params p = default_params(id);
  for (const auto& [k, v] : overrides) {
    bool found = false;
    for (auto& [name, value] : p) {
      if (name == k) {
        value = v;
        found = true;
      }
    }
    if (!found) throw ConfigError("model " + id + " has no parameter " + k);
    if (!std::isfinite(v)) throw ConfigError("parameter " + k + " must be finite");
  }
  return p;
}

std::vector<Mat> structure(int r, std::initializer_list<std::tuple<int, int, int, double>> entries) {
  std::vector<Mat> e(r, Mat::Zero(r, r));
  for (const auto& [k, i, j, v] : entries) {
    e[k](i, j) = v;
    e[k](j, i) = -v;
  }
  return e;
}

CatalogEntry bessel(const Params& params, Derivatives d) {
  CatalogEntry e;
  e.id = "bessel";
  e.params = params;
  e.derivatives = d;
  const double a = e.param("a");
  if (a < 0.5) throw ConfigError("bessel: a >= 1/2 is required for positivity");
  const Builder f(2, d);

  e.sde = make_sde(f.vector(2,
                            [a](const auto* x, auto* out) {
                              out[0] = a / x[0];
                              out[1] = 1.0;
                            }),
                   f.matrix(2, 1,
                            [](const auto*, auto* out) {
                              out[0] = 1.0;
                              out[1] = 0.0;
                            }),
                   [](const double* x) { return x[0] > 0.0; });

  // Quasi-Doob pair: V1 = ((-1, 0), 0, 0, a/x^2) with k1 = -a/x, V2 = d/dz.
  e.symmetries.push_back(f.infinitesimal(
      f.vector(2,
               [](const auto*, auto* out) {
                 out[0] = -1.0;
                 out[1] = 0.0;
               }),
      f.zero_rotation(1), f.zero_scalar(),
      f.vector(1, [a](const auto* x, auto* out) { out[0] = a / (x[0] * x[0]); }),
      f.scalar([a](const auto* x, auto* out) { out[0] = -a / x[0]; })));
  e.symmetry_names.push_back("V1");
  auto dz = f.infinitesimal(f.vector(2,
                                     [](const auto*, auto* out) {
                                       out[0] = 0.0;
                                       out[1] = 1.0;
                                     }),
                            f.zero_rotation(1), f.zero_scalar(), f.zero_vector(1), f.zero_scalar());
  e.symmetries.push_back(dz);
  e.symmetry_names.push_back("V2");
  // Time-rescaling pair: W1 = d/dz, W2 = ((x/2, z), 0, 1, 0).
  e.symmetries.push_back(dz);
  e.symmetry_names.push_back("W1");
  e.symmetries.push_back(f.infinitesimal(f.vector(2,
                                                  [](const auto* x, auto* out) {
                                                    out[0] = 0.5 * x[0];
                                                    out[1] = x[1];
                                                  }),
                                         f.zero_rotation(1), f.one(), f.zero_vector(1), std::nullopt));
  e.symmetry_names.push_back("W2");

  {
    Route r;
    r.id = "quasi_doob";
    r.reduction.phi.forward = f.vector(2, [](const auto* x, auto* out) {
      out[0] = -x[0];
      out[1] = x[1];
    });
    r.reduction.phi.inverse = r.reduction.phi.forward;
    r.reduction.b = f.identity_rotation(1);
    r.reduction.eta = f.one();
    r.reduction.h = f.vector(1, [a](const auto* x, auto* out) { out[0] = -a / x[0]; });
    r.potential = f.scalar([a](const auto* x, auto* out) {
      using std::log;
      out[0] = -a * log(x[0]);
    });
    r.reduced = make_sde(f.vector(2,
                                  [](const auto*, auto* out) {
                                    out[0] = 0.0;
                                    out[1] = 1.0;
                                  }),
                         f.matrix(2, 1,
                                  [](const auto*, auto* out) {
                                    out[0] = -1.0;
                                    out[1] = 0.0;
                                  }),
                         [](const double* x) { return x[0] < 0.0; });
    r.triangular_r = 1;
    r.symmetries = {0, 1};
    r.structure_constants = structure(2, {});
    r.measure_change = true;
    e.routes.push_back(std::move(r));
  }
  {
    Route r;
    r.id = "lamperti";
    r.reduction.phi.forward = f.vector(2, [](const auto* x, auto* out) {
      using std::log;
      out[0] = x[1] - x[0] * x[0];
      out[1] = 2.0 * log(x[0]);
    });
    r.reduction.phi.inverse = f.vector(2, [](const auto* x, auto* out) {
      using std::exp;
      out[0] = exp(0.5 * x[1]);
      out[1] = x[0] + exp(x[1]);
    });
    r.reduction.b = f.identity_rotation(1);
    r.reduction.eta = f.scalar([](const auto* x, auto* out) { out[0] = 1.0 / (x[0] * x[0]); });
    r.reduction.h = f.zero_vector(1);
    r.reduced = make_sde(f.vector(2,
                                  [a](const auto* x, auto* out) {
                                    using std::exp;
                                    out[0] = -2.0 * a * exp(x[1]);
                                    out[1] = 2.0 * a - 1.0;
                                  }),
                         f.matrix(2, 1,
                                  [](const auto* x, auto* out) {
                                    using std::exp;
                                    out[0] = -2.0 * exp(x[1]);
                                    out[1] = 2.0;
                                  }),
                         whole_space());
    r.triangular_r = 1;
    r.symmetries = {2, 3};
    r.structure_constants = structure(2, {{0, 0, 1, 1.0}});
    r.time_change = true;
    e.routes.push_back(std::move(r));
  }
  e.default_route = "quasi_doob";
  e.test_box = {Vec((Vec(2) << 0.25, 0.0).finished()), Vec((Vec(2) << 4.0, 2.0).finished()), nullptr};
  e.x0 = (Vec(2) << 1.0, 0.0).finished();
  e.default_observable = "x2";
  return e;
}

CatalogEntry cir(const Params& params, Derivatives d) {
  CatalogEntry e;
  e.id = "cir";
  e.params = params;
  e.derivatives = d;
  const double a = e.param("a");
  const double b = e.param("b");
  const double s0 = e.param("sigma0");
  const double k = e.param("k");
  if (!(s0 > 0.0)) throw ConfigError("cir: sigma0 must be positive");
  if (2.0 * b < s0 * s0) throw ConfigError("cir: Feller condition 2b >= sigma0^2 violated");
  const Builder f(2, d);

  e.sde = make_sde(f.vector(2,
                            [a, b](const auto* x, auto* out) {
                              out[0] = a * x[0] + b;
                              out[1] = 1.0;
                            }),
                   f.matrix(2, 1,
                            [s0](const auto* x, auto* out) {
                              using std::sqrt;
                              out[0] = s0 * sqrt(x[0]);
                              out[1] = 0.0;
                            }),
                   [](const double* x) { return x[0] > 0.0; });

  const double p = (a + 2.0 * k);
  const double q = (s0 * s0 - 4.0 * b);
  e.symmetries.push_back(f.infinitesimal(
      f.vector(2,
               [k](const auto* x, auto* out) {
                 using std::exp;
                 using std::sqrt;
                 out[0] = exp(-k * x[1]) * sqrt(x[0]);
                 out[1] = 0.0;
               }),
      f.zero_rotation(1), f.zero_scalar(),
      f.vector(1,
               [k, p, q, s0](const auto* x, auto* out) {
                 using std::exp;
                 out[0] = exp(-k * x[1]) * (p / (2.0 * s0) + q / (8.0 * s0 * x[0]));
               }),
      f.scalar([k, p, q, s0](const auto* x, auto* out) {
        using std::exp;
        using std::sqrt;
        const auto r = sqrt(x[0]);
        out[0] = exp(-k * x[1]) * (p * r / (s0 * s0) - q / (4.0 * s0 * s0 * r));
      })));
  e.symmetry_names.push_back("V1");
  e.symmetries.push_back(f.infinitesimal(f.vector(2,
                                                  [](const auto*, auto* out) {
                                                    out[0] = 0.0;
                                                    out[1] = 1.0;
                                                  }),
                                         f.zero_rotation(1), f.zero_scalar(), f.zero_vector(1),
                                         f.zero_scalar()));
  e.symmetry_names.push_back("V2");

  Route r;
  r.id = "quasi_doob";
  r.reduction.phi.forward = f.vector(2, [k](const auto* x, auto* out) {
    using std::exp;
    using std::sqrt;
    out[0] = 2.0 * sqrt(x[0]) * exp(k * x[1]);
    out[1] = x[1];
  });
  r.reduction.phi.inverse = f.vector(2, [k](const auto* x, auto* out) {
    using std::exp;
    const auto u = 0.5 * x[0] * exp(-k * x[1]);
    out[0] = u * u;
    out[1] = x[1];
  });
  r.reduction.b = f.identity_rotation(1);
  r.reduction.eta = f.one();
  r.reduction.h = f.vector(1, [p, q, s0](const auto* x, auto* out) {
    using std::sqrt;
    const auto rt = sqrt(x[0]);
    out[0] = -p * rt / s0 + q / (4.0 * s0 * rt);
  });
  r.potential = f.scalar([p, q, s0](const auto* x, auto* out) {
    using std::log;
    out[0] = -p * x[0] / (s0 * s0) + q / (4.0 * s0 * s0) * log(x[0]);
  });
  r.reduced = make_sde(f.vector(2,
                                [](const auto*, auto* out) {
                                  out[0] = 0.0;
                                  out[1] = 1.0;
                                }),
                       f.matrix(2, 1,
                                [s0, k](const auto* x, auto* out) {
                                  using std::exp;
                                  out[0] = s0 * exp(k * x[1]);
                                  out[1] = 0.0;
                                }),
                       [](const double* x) { return x[0] > 0.0; });
  r.triangular_r = 1;
  r.symmetries = {0, 1};
  r.structure_constants = structure(2, {{0, 0, 1, k}});
  r.measure_change = true;
  e.routes.push_back(std::move(r));
  e.default_route = "quasi_doob";
  e.test_box = {Vec((Vec(2) << 0.25, 0.0).finished()), Vec((Vec(2) << 4.0, 2.0).finished()), nullptr};
  e.x0 = (Vec(2) << 1.0, 0.0).finished();
  e.default_observable = "mean";
  return e;
}

CatalogEntry ou(const Params& params, Derivatives d) {
  CatalogEntry e;
  e.id = "ou";
  e.params = params;
  e.derivatives = d;
  const double a = e.param("a");
  const double b = e.param("b");
  const double c = e.param("c");
  if (a == 0.0) throw ConfigError("ou: a must be nonzero");
  const Builder f(2, d);

  e.sde = make_sde(f.vector(2,
                            [a, b](const auto* x, auto* out) {
                              out[0] = a * x[0] + b;
                              out[1] = 1.0;
                            }),
                   f.matrix(2, 1,
                            [](const auto*, auto* out) {
                              out[0] = 1.0;
                              out[1] = 0.0;
                            }),
                   whole_space());

  e.symmetries.push_back(f.infinitesimal(
      f.vector(2,
               [a](const auto* x, auto* out) {
                 using std::exp;
                 out[0] = 0.5 * exp(-a * x[1]);
                 out[1] = 0.0;
               }),
      f.zero_rotation(1), f.zero_scalar(),
      f.vector(1,
               [a](const auto* x, auto* out) {
                 using std::exp;
                 out[0] = a * exp(-a * x[1]);
               }),
      f.scalar([a](const auto* x, auto* out) {
        using std::exp;
        out[0] = a * x[0] * exp(-a * x[1]);
      })));
  e.symmetry_names.push_back("V1");
  e.symmetries.push_back(f.infinitesimal(f.vector(2,
                                                  [](const auto*, auto* out) {
                                                    out[0] = 0.0;
                                                    out[1] = 1.0;
                                                  }),
                                         f.zero_rotation(1), f.zero_scalar(), f.zero_vector(1),
                                         f.zero_scalar()));
  e.symmetry_names.push_back("V2");

  Route r;
  r.id = "doob";
  r.reduction.phi.forward = f.vector(2, [a](const auto* x, auto* out) {
    using std::exp;
    out[0] = 2.0 * x[0] * exp(a * x[1]);
    out[1] = x[1] - 1.0;
  });
  r.reduction.phi.inverse = f.vector(2, [a](const auto* x, auto* out) {
    using std::exp;
    out[0] = 0.5 * x[0] * exp(-a * (x[1] + 1.0));
    out[1] = x[1] + 1.0;
  });
  r.reduction.b = f.identity_rotation(1);
  r.reduction.eta = f.one();
  r.reduction.h = f.vector(1, [a, c](const auto* x, auto* out) { out[0] = -2.0 * a * x[0] + c; });
  r.potential = f.scalar([a, c](const auto* x, auto* out) {
    out[0] = -a * x[0] * x[0] + c * x[0] + a * x[1];
  });
  r.reduced = make_sde(f.vector(2,
                                [a, b, c](const auto* x, auto* out) {
                                  using std::exp;
                                  out[0] = 2.0 * (b + c) * exp(a * (x[1] + 1.0));
                                  out[1] = 1.0;
                                }),
                       f.matrix(2, 1,
                                [a](const auto* x, auto* out) {
                                  using std::exp;
                                  out[0] = 2.0 * exp(a * (x[1] + 1.0));
                                  out[1] = 0.0;
                                }),
                       whole_space());
  r.triangular_r = 1;
  r.symmetries = {0, 1};
  r.structure_constants = structure(2, {{0, 0, 1, a}});
  r.measure_change = true;
  e.routes.push_back(std::move(r));
  e.default_route = "doob";
  e.test_box = {Vec((Vec(2) << -2.0, 0.0).finished()), Vec((Vec(2) << 2.0, 2.0).finished()), nullptr};
  e.x0 = (Vec(2) << 1.0, 0.0).finished();
  e.default_observable = "mean";
  return e;
}

CatalogEntry twod(const Params& params, Derivatives d) {
  CatalogEntry e;
  e.id = "twod";
  e.params = params;
  e.derivatives = d;
  const double al = e.param("alpha");
  const Builder f(3, d);

  e.sde = make_sde(f.vector(3,
                            [al](const auto* x, auto* out) {
                              const auto r2 = x[0] * x[0] + x[1] * x[1];
                              out[0] = al * x[0] / r2;
                              out[1] = -al * x[1] / r2;
                              out[2] = 1.0;
                            }),
                   f.matrix(3, 2,
                            [](const auto* x, auto* out) {
                              using std::sqrt;
                              const auto r2 = x[0] * x[0] + x[1] * x[1];
                              const auto s = (x[0] * x[0] - x[1] * x[1]) / sqrt(r2);
                              out[0] = s;
                              out[1] = 0.0;
                              out[2] = 0.0;
                              out[3] = 0.0;
                              out[4] = s;
                              out[5] = 0.0;
                            }),
                   [](const double* x) { return x[0] > std::abs(x[1]); });

  e.symmetries.push_back(f.infinitesimal(
      f.vector(3,
               [](const auto* x, auto* out) {
                 const auto r2 = x[0] * x[0] + x[1] * x[1];
                 out[0] = x[1] / r2;
                 out[1] = x[0] / r2;
                 out[2] = 0.0;
               }),
      f.matrix(2, 2,
               [](const auto* x, auto* out) {
                 const auto r2 = x[0] * x[0] + x[1] * x[1];
                 const auto w = (x[0] * x[0] - x[1] * x[1]) / (r2 * r2);
                 out[0] = 0.0;
                 out[1] = -w;
                 out[2] = w;
                 out[3] = 0.0;
               }),
      f.zero_scalar(), f.zero_vector(2), f.zero_scalar()));
  e.symmetry_names.push_back("V1");
  e.symmetries.push_back(f.infinitesimal(
      f.vector(3,
               [](const auto* x, auto* out) {
                 out[0] = x[0];
                 out[1] = x[1];
                 out[2] = 0.0;
               }),
      f.zero_rotation(2), f.zero_scalar(),
      f.vector(2,
               [al](const auto* x, auto* out) {
                 using std::sqrt;
                 const auto r = sqrt(x[0] * x[0] + x[1] * x[1]);
                 const auto dd = x[0] * x[0] - x[1] * x[1];
                 out[0] = -2.0 * al * x[0] / (dd * r);
                 out[1] = 2.0 * al * x[1] / (dd * r);
               }),
      f.scalar([al](const auto* x, auto* out) { out[0] = al / (x[0] * x[0] - x[1] * x[1]); })));
  e.symmetry_names.push_back("V2");
  e.symmetries.push_back(f.infinitesimal(f.vector(3,
                                                  [](const auto*, auto* out) {
                                                    out[0] = 0.0;
                                                    out[1] = 0.0;
                                                    out[2] = 1.0;
                                                  }),
                                         f.zero_rotation(2), f.zero_scalar(), f.zero_vector(2),
                                         f.zero_scalar()));
  e.symmetry_names.push_back("V3");

  Route r;
  r.id = "rotation";
  r.reduction.phi.forward = f.vector(3, [](const auto* x, auto* out) {
    using std::log;
    out[0] = x[0] * x[1];
    out[1] = 0.5 * log(x[0] * x[0] - x[1] * x[1]);
    out[2] = x[2];
  });
  // Branch with x > |y|.
  r.reduction.phi.inverse = f.vector(3, [](const auto* x, auto* out) {
    using std::exp;
    using std::sqrt;
    const auto e2 = exp(2.0 * x[1]);
    const auto s = sqrt(e2 * e2 + 4.0 * x[0] * x[0]);
    const auto u = sqrt(0.5 * (s + e2));
    out[0] = u;
    out[1] = x[0] / u;
    out[2] = x[2];
  });
  r.reduction.b = f.matrix(2, 2, [](const auto* x, auto* out) {
    using std::sqrt;
    const auto rr = sqrt(x[0] * x[0] + x[1] * x[1]);
    out[0] = x[1] / rr;
    out[1] = -x[0] / rr;
    out[2] = x[0] / rr;
    out[3] = x[1] / rr;
  });
  r.reduction.eta = f.one();
  r.reduction.h = f.vector(2, [al](const auto* x, auto* out) {
    using std::sqrt;
    const auto rr = sqrt(x[0] * x[0] + x[1] * x[1]);
    const auto dd = x[0] * x[0] - x[1] * x[1];
    out[0] = (x[1] - al * x[0] / dd) / rr;
    out[1] = (x[0] + al * x[1] / dd) / rr;
  });
  r.reduced = make_sde(f.vector(3,
                                [](const auto* x, auto* out) {
                                  using std::exp;
                                  out[0] = exp(2.0 * x[1]);
                                  out[1] = -1.0;
                                  out[2] = 1.0;
                                }),
                       f.matrix(3, 2,
                                [](const auto* x, auto* out) {
                                  using std::exp;
                                  out[0] = exp(2.0 * x[1]);
                                  out[1] = 0.0;
                                  out[2] = 0.0;
                                  out[3] = 0.0;
                                  out[4] = -1.0;
                                  out[5] = 0.0;
                                }),
                       whole_space());
  r.triangular_r = 2;
  r.symmetries = {0, 1, 2};
  r.structure_constants = structure(3, {{0, 0, 1, 2.0}});
  r.measure_change = true;
  r.rotation = true;
  e.routes.push_back(std::move(r));
  e.default_route = "rotation";
  e.test_box = {Vec((Vec(3) << 0.5, -2.0, 0.0).finished()),
                Vec((Vec(3) << 3.0, 2.0, 2.0).finished()),
                [](const double* x) { return x[0] > std::abs(x[1]) + 0.25; }};
  e.x0 = (Vec(3) << 1.5, 0.5, 0.0).finished();
  e.default_observable = "mean";
  return e;
}

}  // namespace

CatalogEntry get_model(const std::string& id, const std::map<std::string, double>& overrides,
                       Derivatives derivatives) {
  const Params p = merge(id, overrides);
  if (id == "bessel") return bessel(p, derivatives);
  if (id == "cir") return cir(p, derivatives);
  if (id == "ou") return ou(p, derivatives);
  if (id == "twod") return twod(p, derivatives);
  throw ConfigError("unknown model: " + id);
}

int observable_times(const std::string& observable) {
  if (observable == "mean" || observable == "x2") return 1;
  if (observable == "prod") return 2;
  throw ConfigError("unknown observable: " + observable);
}

double observable_value(const std::string& observable, const std::vector<double>& v) {
  if (observable == "mean") return v.at(0);
  if (observable == "x2") return v.at(0) * v.at(0);
  if (observable == "prod") return v.at(0) * v.at(1);
  throw ConfigError("unknown observable: " + observable);
}

std::optional<double> oracle_value(const CatalogEntry& entry, const std::string& observable,
                                   const std::vector<double>& times, const Vec& x0) {
  const double x = x0[0];
  if (!times.empty() && std::all_of(times.begin(), times.end(), [](double t) { return t == 0.0; }))
    return observable_value(observable, std::vector<double>(times.size(), x));
  if (entry.id == "bessel" && observable == "x2" && times.size() == 1) {
    return x * x + (2.0 * entry.param("a") + 1.0) * times[0];
  }
  if ((entry.id == "ou" || entry.id == "cir") && times.size() >= 1) {
    const double a = entry.param("a");
    const double b = entry.param("b");
    auto mean = [&](double t) { return x * std::exp(a * t) + (b / a) * (std::exp(a * t) - 1.0); };
    if (observable == "mean" && times.size() == 1) return mean(times[0]);
    if (entry.id == "ou") {
      auto var = [&](double t) { return (std::exp(2.0 * a * t) - 1.0) / (2.0 * a); };
      if (observable == "x2" && times.size() == 1) {
        const double m = mean(times[0]);
        return m * m + var(times[0]);
      }
      if (observable == "prod" && times.size() == 2) {
        const double s = std::min(times[0], times[1]);
        const double t = std::max(times[0], times[1]);
        const double m = mean(s);
        const double second = m * m + var(s);
        const double g = std::exp(a * (t - s));
        return g * second + (b / a) * (g - 1.0) * m;
      }
    }
  }
  return std::nullopt;
}

}  // namespace stochsym
