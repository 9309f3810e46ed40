#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "stochsym/jet.hpp"

namespace stochsym {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Upper bound on state and noise dimensions; composed evaluators use stack
// buffers of this size.
inline constexpr int kMaxDim = 8;

// Relative steps of the fourth-order central stencils: h = step * max(1, |x_i|).
struct DiffConfig {
  double first_step = 0.0;
  double second_step = 0.0;

  // Steps tuned to the noise carried by a field's values. Level 0 values are
  // exact to rounding, level 1 carry first-difference error, level 2 carry
  // second-difference error.
  static DiffConfig for_level(int level);
};

// Evaluator from R^n to a rows x cols array (column-major flat storage).
// Derivatives come from an optional analytic evaluator, otherwise from
// central differences.
class Field {
 public:
  using Eval = std::function<void(const double* x, double* out)>;
  // jac: size x n column-major; hess: size blocks of n x n. Either may be null.
  using Derivs = std::function<void(const double* x, double* jac, double* hess)>;

  Field() = default;
  Field(int in_dim, int rows, int cols, Eval eval, int fd_level = 0);

  int in_dim() const { return in_dim_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }
  int fd_level() const { return level_; }
  bool has_derivatives() const { return static_cast<bool>(derivs_); }
  const DiffConfig& steps() const { return steps_; }
  explicit operator bool() const { return static_cast<bool>(eval_); }

  Field with_derivatives(Derivs derivs) const;
  Field without_derivatives() const;
  Field with_steps(const DiffConfig& steps) const;

  void eval(const double* x, double* out) const { eval_(x, out); }
  Vec flat(const Vec& x) const;

  Mat jacobian(const Vec& x) const;
  std::vector<Mat> hessians(const Vec& x) const;
  // Derivative of the flat output along dir: jacobian(x) * dir.
  Vec directional(const Vec& x, const Vec& dir) const;

  // Noise level of a quantity built from this field's derivatives of `order`.
  int derived_level(int order) const;

 private:
  int in_dim_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  int level_ = 0;
  DiffConfig steps_;
  Eval eval_;
  Derivs derivs_;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Field f);
  static ScalarField constant(int n, double c);

  double operator()(const Vec& x) const;
  double eval(const double* x) const {
    double v;
    f_.eval(x, &v);
    return v;
  }
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  double directional(const Vec& x, const Vec& dir) const;

  const Field& field() const { return f_; }
  int in_dim() const { return f_.in_dim(); }
  explicit operator bool() const { return static_cast<bool>(f_); }

 private:
  Field f_;
};

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(Field f);
  static VectorField constant(const Vec& c, int n);
  static VectorField zero(int n, int dim);
  static VectorField identity(int n);

  Vec operator()(const Vec& x) const;
  void eval(const double* x, double* out) const { f_.eval(x, out); }
  Mat jacobian(const Vec& x) const { return f_.jacobian(x); }
  std::vector<Mat> hessians(const Vec& x) const { return f_.hessians(x); }
  Vec directional(const Vec& x, const Vec& dir) const { return f_.directional(x, dir); }

  int dim() const { return f_.rows(); }
  int in_dim() const { return f_.in_dim(); }
  const Field& field() const { return f_; }
  explicit operator bool() const { return static_cast<bool>(f_); }

 private:
  Field f_;
};

class MatrixField {
 public:
  MatrixField() = default;
  explicit MatrixField(Field f);
  static MatrixField constant(const Mat& c, int n);
  static MatrixField identity(int n, int m);

  Mat operator()(const Vec& x) const;
  void eval(const double* x, double* out) const { f_.eval(x, out); }
  // d/dx_i of the matrix, one entry per coordinate.
  std::vector<Mat> partials(const Vec& x) const;
  Mat directional(const Vec& x, const Vec& dir) const;

  int rows() const { return f_.rows(); }
  int cols() const { return f_.cols(); }
  int in_dim() const { return f_.in_dim(); }
  const Field& field() const { return f_; }
  explicit operator bool() const { return static_cast<bool>(f_); }

 private:
  Field f_;
};

namespace detail {

template <class Fn>
void jet_derivatives(const Fn& fn, int n, int size, const double* x, double* jac,
                     double* hess) {
  std::array<Jet, kJetMaxDim> xj;
  std::array<Jet, kMaxDim * kMaxDim> out;
  for (int i = 0; i < n; ++i) xj[i] = Jet::variable(x[i], i);
  fn(xj.data(), out.data());
  for (int p = 0; p < size; ++p) {
    if (jac != nullptr)
      for (int i = 0; i < n; ++i) jac[p + i * size] = out[p].d(i);
    if (hess != nullptr)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) hess[p * n * n + i + j * n] = out[p].dd(i, j);
  }
}

}  // namespace detail

// Builds a field from generic code `fn(const T* x, T* out)` instantiated on
// double for values and, when `analytic` holds, on Jet for exact derivatives.
template <class Fn>
Field make_field(int in_dim, int rows, int cols, Fn fn, bool analytic = true) {
  Field f(in_dim, rows, cols, [fn](const double* x, double* out) { fn(x, out); });
  if (!analytic || in_dim > kJetMaxDim) return f;
  const int size = rows * cols;
  return f.with_derivatives([fn, in_dim, size](const double* x, double* jac, double* hess) {
    detail::jet_derivatives(fn, in_dim, size, x, jac, hess);
  });
}

}  // namespace stochsym
