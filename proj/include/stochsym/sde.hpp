#pragma once

#include <functional>

#include "stochsym/field.hpp"

namespace stochsym {

using Domain = std::function<bool(const double* x)>;

// Ito SDE dX = mu(X) dt + sigma(X) dW on an open set of R^n, W m-dimensional.
struct Sde {
  int n = 0;
  int m = 0;
  VectorField mu;
  MatrixField sigma;
  Domain domain;

  bool contains(const double* x) const { return !domain || domain(x); }
  bool contains(const Vec& x) const { return contains(x.data()); }
};

Sde make_sde(VectorField mu, MatrixField sigma, Domain domain = nullptr);

Domain whole_space();

// 1/2 (sigma sigma^T)^{ij} d_i d_j f + mu^i d_i f at x.
double generator_apply(const Sde& sde, const ScalarField& f, const Vec& x);
// Componentwise generator of a vector-valued field.
Vec generator_apply(const Sde& sde, const VectorField& f, const Vec& x);

// Same as above but from precomputed gradient and Hessian of f at x.
double generator_from_derivatives(const Vec& mu, const Mat& sigma, const Vec& grad,
                                  const Mat& hess);

}  // namespace stochsym
