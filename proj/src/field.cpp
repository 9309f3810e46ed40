#include "stochsym/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stochsym/errors.hpp"

namespace stochsym {

DiffConfig DiffConfig::for_level(int level) {
  const double eps = std::numeric_limits<double>::epsilon();
  switch (std::clamp(level, 0, 2)) {
    case 0:
      return {std::pow(eps, 0.2), std::pow(eps, 1.0 / 6.0)};
    case 1:
      return {2e-3, 5e-3};
    default:
      return {5e-3, 1e-2};
  }
}

Field::Field(int in_dim, int rows, int cols, Eval eval, int fd_level)
    : in_dim_(in_dim),
      rows_(rows),
      cols_(cols),
      level_(fd_level),
      steps_(DiffConfig::for_level(fd_level)),
      eval_(std::move(eval)) {
  if (in_dim <= 0 || in_dim > kMaxDim || rows <= 0 || cols <= 0 || rows * cols > kMaxDim * kMaxDim)
    throw ConfigError("field dimensions out of range");
}

Field Field::with_derivatives(Derivs derivs) const {
  Field f = *this;
  f.derivs_ = std::move(derivs);
  return f;
}

Field Field::without_derivatives() const {
  Field f = *this;
  f.derivs_ = nullptr;
  return f;
}

Field Field::with_steps(const DiffConfig& steps) const {
  Field f = *this;
  f.steps_ = steps;
  return f;
}

Vec Field::flat(const Vec& x) const {
  Vec out(size());
  eval_(x.data(), out.data());
  return out;
}

namespace {

double step_for(double xi, double scale) {
  const double h = scale * std::max(1.0, std::abs(xi));
  // Round so x+h and x-h are exactly representable offsets.
  volatile double t = xi + h;
  return t - xi;
}

}  // namespace

// Fourth-order central stencils: first derivative weights on offsets
// -2..2 are (1, -8, 0, 8, -1)/12, second derivative (-1, 16, -30, 16, -1)/12.
Mat Field::jacobian(const Vec& x) const {
  const int n = in_dim_;
  const int p = size();
  Mat jac(p, n);
  if (derivs_) {
    derivs_(x.data(), jac.data(), nullptr);
    return jac;
  }
  Vec y = x;
  Vec f1(p), f2(p), f3(p), f4(p);
  for (int i = 0; i < n; ++i) {
    const double h = step_for(x[i], steps_.first_step);
    y[i] = x[i] - 2.0 * h;
    eval_(y.data(), f1.data());
    y[i] = x[i] - h;
    eval_(y.data(), f2.data());
    y[i] = x[i] + h;
    eval_(y.data(), f3.data());
    y[i] = x[i] + 2.0 * h;
    eval_(y.data(), f4.data());
    y[i] = x[i];
    jac.col(i) = (f1 - 8.0 * f2 + 8.0 * f3 - f4) / (12.0 * h);
  }
  return jac;
}

std::vector<Mat> Field::hessians(const Vec& x) const {
  const int n = in_dim_;
  const int p = size();
  std::vector<Mat> out(p, Mat::Zero(n, n));
  if (derivs_) {
    Vec buf(p * n * n);
    derivs_(x.data(), nullptr, buf.data());
    for (int k = 0; k < p; ++k) out[k] = Eigen::Map<const Mat>(buf.data() + k * n * n, n, n);
    return out;
  }
  static constexpr std::array<double, 5> kFirst = {1.0, -8.0, 0.0, 8.0, -1.0};
  static constexpr std::array<double, 5> kSecond = {-1.0, 16.0, -30.0, 16.0, -1.0};
  Vec h(n);
  for (int i = 0; i < n; ++i) h[i] = step_for(x[i], steps_.second_step);
  Vec y = x;
  Vec fv(p), acc(p);
  for (int i = 0; i < n; ++i) {
    acc.setZero();
    for (int a = 0; a < 5; ++a) {
      y[i] = x[i] + (a - 2) * h[i];
      eval_(y.data(), fv.data());
      acc += kSecond[a] * fv;
    }
    y[i] = x[i];
    acc /= 12.0 * h[i] * h[i];
    for (int k = 0; k < p; ++k) out[k](i, i) = acc[k];
    for (int j = i + 1; j < n; ++j) {
      acc.setZero();
      for (int a = 0; a < 5; ++a) {
        if (a == 2) continue;
        for (int b = 0; b < 5; ++b) {
          if (b == 2) continue;
          y[i] = x[i] + (a - 2) * h[i];
          y[j] = x[j] + (b - 2) * h[j];
          eval_(y.data(), fv.data());
          acc += kFirst[a] * kFirst[b] * fv;
        }
      }
      y[i] = x[i];
      y[j] = x[j];
      acc /= 144.0 * h[i] * h[j];
      for (int k = 0; k < p; ++k) out[k](i, j) = out[k](j, i) = acc[k];
    }
  }
  return out;
}

Vec Field::directional(const Vec& x, const Vec& dir) const { return jacobian(x) * dir; }

int Field::derived_level(int order) const {
  if (derivs_) return level_;
  return std::min(2, level_ + order);
}

ScalarField::ScalarField(Field f) : f_(std::move(f)) {
  if (f_.size() != 1) throw ConfigError("scalar field must have a 1x1 output");
}

ScalarField ScalarField::constant(int n, double c) {
  return ScalarField(make_field(n, 1, 1, [c](const auto*, auto* out) { out[0] = c; }));
}

double ScalarField::operator()(const Vec& x) const { return eval(x.data()); }

Vec ScalarField::gradient(const Vec& x) const { return f_.jacobian(x).transpose(); }

Mat ScalarField::hessian(const Vec& x) const { return f_.hessians(x).front(); }

double ScalarField::directional(const Vec& x, const Vec& dir) const {
  return f_.directional(x, dir)[0];
}

VectorField::VectorField(Field f) : f_(std::move(f)) {
  if (f_.cols() != 1) throw ConfigError("vector field must have a single column");
}

VectorField VectorField::constant(const Vec& c, int n) {
  const int dim = static_cast<int>(c.size());
  std::array<double, kMaxDim> v{};
  for (int i = 0; i < dim; ++i) v[i] = c[i];
  return VectorField(make_field(n, dim, 1, [v, dim](const auto*, auto* out) {
    for (int i = 0; i < dim; ++i) out[i] = v[i];
  }));
}

VectorField VectorField::zero(int n, int dim) { return constant(Vec::Zero(dim), n); }

VectorField VectorField::identity(int n) {
  return VectorField(make_field(n, n, 1, [n](const auto* x, auto* out) {
    for (int i = 0; i < n; ++i) out[i] = x[i];
  }));
}

Vec VectorField::operator()(const Vec& x) const { return f_.flat(x); }

MatrixField::MatrixField(Field f) : f_(std::move(f)) {}

MatrixField MatrixField::constant(const Mat& c, int n) {
  const int r = static_cast<int>(c.rows());
  const int k = static_cast<int>(c.cols());
  std::array<double, kMaxDim * kMaxDim> v{};
  for (int i = 0; i < r * k; ++i) v[i] = c.data()[i];
  return MatrixField(make_field(n, r, k, [v, r, k](const auto*, auto* out) {
    for (int i = 0; i < r * k; ++i) out[i] = v[i];
  }));
}

MatrixField MatrixField::identity(int n, int m) { return constant(Mat::Identity(m, m), n); }

Mat MatrixField::operator()(const Vec& x) const {
  Mat out(rows(), cols());
  f_.eval(x.data(), out.data());
  return out;
}

std::vector<Mat> MatrixField::partials(const Vec& x) const {
  const Mat jac = f_.jacobian(x);
  std::vector<Mat> out;
  out.reserve(in_dim());
  for (int i = 0; i < in_dim(); ++i)
    out.emplace_back(Eigen::Map<const Mat>(jac.col(i).data(), rows(), cols()));
  return out;
}

Mat MatrixField::directional(const Vec& x, const Vec& dir) const {
  const Vec d = f_.directional(x, dir);
  return Eigen::Map<const Mat>(d.data(), rows(), cols());
}

}  // namespace stochsym
