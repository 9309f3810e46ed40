#pragma once

#include <array>
#include <cmath>

namespace stochsym {

// Second-order forward-mode jet: value, gradient and Hessian with respect to
// up to kJetMaxDim seeded variables. Catalog closed forms are written once as
// generic code and evaluated on Jet to get exact first and second derivatives.
inline constexpr int kJetMaxDim = 4;

class Jet {
 public:
  Jet() = default;
  Jet(double v) : v_(v) {}  // NOLINT(google-explicit-constructor): constants promote

  static Jet variable(double v, int index) {
    Jet j(v);
    j.d_[index] = 1.0;
    return j;
  }

  double value() const { return v_; }
  double d(int i) const { return d_[i]; }
  double dd(int i, int j) const { return dd_[i * kJetMaxDim + j]; }

  // f(u) with f' and f'' evaluated at u.value().
  static Jet chain(const Jet& u, double f, double df, double d2f) {
    Jet r(f);
    for (int i = 0; i < kJetMaxDim; ++i) r.d_[i] = df * u.d_[i];
    for (int i = 0; i < kJetMaxDim; ++i)
      for (int j = 0; j < kJetMaxDim; ++j)
        r.dd_[i * kJetMaxDim + j] =
            df * u.dd_[i * kJetMaxDim + j] + d2f * u.d_[i] * u.d_[j];
    return r;
  }

  Jet& operator+=(const Jet& o) {
    v_ += o.v_;
    for (int i = 0; i < kJetMaxDim; ++i) d_[i] += o.d_[i];
    for (int i = 0; i < kJetMaxDim * kJetMaxDim; ++i) dd_[i] += o.dd_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v_ -= o.v_;
    for (int i = 0; i < kJetMaxDim; ++i) d_[i] -= o.d_[i];
    for (int i = 0; i < kJetMaxDim * kJetMaxDim; ++i) dd_[i] -= o.dd_[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    Jet r(v_ * o.v_);
    for (int i = 0; i < kJetMaxDim; ++i) r.d_[i] = d_[i] * o.v_ + v_ * o.d_[i];
    for (int i = 0; i < kJetMaxDim; ++i)
      for (int j = 0; j < kJetMaxDim; ++j) {
        const int k = i * kJetMaxDim + j;
        r.dd_[k] = dd_[k] * o.v_ + v_ * o.dd_[k] + d_[i] * o.d_[j] + o.d_[i] * d_[j];
      }
    return *this = r;
  }
  Jet& operator/=(const Jet& o) {
    const double inv = 1.0 / o.v_;
    return *this *= chain(o, inv, -inv * inv, 2.0 * inv * inv * inv);
  }

  Jet operator-() const {
    Jet r = *this;
    r.v_ = -r.v_;
    for (auto& x : r.d_) x = -x;
    for (auto& x : r.dd_) x = -x;
    return r;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
  friend Jet operator/(Jet a, const Jet& b) { return a /= b; }
  friend Jet operator+(Jet a, double b) { a.v_ += b; return a; }
  friend Jet operator+(double a, Jet b) { b.v_ += a; return b; }
  friend Jet operator-(Jet a, double b) { a.v_ -= b; return a; }
  friend Jet operator-(double a, const Jet& b) { return -b + a; }
  friend Jet operator*(Jet a, double b) { return a.scale(b); }
  friend Jet operator*(double a, Jet b) { return b.scale(a); }
  friend Jet operator/(Jet a, double b) { return a.scale(1.0 / b); }
  friend Jet operator/(double a, const Jet& b) {
    const double inv = 1.0 / b.v_;
    return chain(b, a * inv, -a * inv * inv, 2.0 * a * inv * inv * inv);
  }

  friend bool operator<(const Jet& a, const Jet& b) { return a.v_ < b.v_; }
  friend bool operator>(const Jet& a, const Jet& b) { return a.v_ > b.v_; }

 private:
  Jet& scale(double s) {
    v_ *= s;
    for (auto& x : d_) x *= s;
    for (auto& x : dd_) x *= s;
    return *this;
  }

  double v_ = 0.0;
  std::array<double, kJetMaxDim> d_{};
  std::array<double, kJetMaxDim * kJetMaxDim> dd_{};
};

inline Jet exp(const Jet& u) {
  const double e = std::exp(u.value());
  return Jet::chain(u, e, e, e);
}
inline Jet log(const Jet& u) {
  const double v = u.value();
  return Jet::chain(u, std::log(v), 1.0 / v, -1.0 / (v * v));
}
inline Jet sqrt(const Jet& u) {
  const double s = std::sqrt(u.value());
  return Jet::chain(u, s, 0.5 / s, -0.25 / (s * u.value()));
}
inline Jet pow(const Jet& u, double p) {
  const double v = u.value();
  return Jet::chain(u, std::pow(v, p), p * std::pow(v, p - 1.0),
                    p * (p - 1.0) * std::pow(v, p - 2.0));
}
inline Jet sin(const Jet& u) {
  const double s = std::sin(u.value());
  return Jet::chain(u, s, std::cos(u.value()), -s);
}
inline Jet cos(const Jet& u) {
  const double c = std::cos(u.value());
  return Jet::chain(u, c, -std::sin(u.value()), -c);
}
inline Jet abs(const Jet& u) { return u.value() < 0.0 ? -u : u; }

}  // namespace stochsym
