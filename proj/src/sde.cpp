#include "stochsym/sde.hpp"

#include <cmath>

#include "stochsym/errors.hpp"

namespace stochsym {

Sde make_sde(VectorField mu, MatrixField sigma, Domain domain) {
  Sde s;
  s.n = mu.dim();
  s.m = sigma.cols();
  if (mu.in_dim() != s.n || sigma.rows() != s.n || sigma.in_dim() != s.n)
    throw ConfigError("sde: drift and diffusion dimensions disagree");
  s.mu = std::move(mu);
  s.sigma = std::move(sigma);
  s.domain = std::move(domain);
  return s;
}

Domain whole_space() {
  return [](const double*) { return true; };
}

double generator_from_derivatives(const Vec& mu, const Mat& sigma, const Vec& grad,
                                  const Mat& hess) {
  const Mat a = sigma * sigma.transpose();
  return 0.5 * (a.cwiseProduct(hess)).sum() + mu.dot(grad);
}

namespace {

void require_domain(const Sde& sde, const Vec& x) {
  if (!x.allFinite()) throw NumericError("generator: non-finite point");
  if (!sde.contains(x)) throw DomainError("generator: point outside domain");
}

}  // namespace

double generator_apply(const Sde& sde, const ScalarField& f, const Vec& x) {
  require_domain(sde, x);
  const double v = generator_from_derivatives(sde.mu(x), sde.sigma(x), f.gradient(x), f.hessian(x));
  if (!std::isfinite(v)) throw NumericError("generator: non-finite value");
  return v;
}

Vec generator_apply(const Sde& sde, const VectorField& f, const Vec& x) {
  require_domain(sde, x);
  const Vec mu = sde.mu(x);
  const Mat a = sde.sigma(x) * sde.sigma(x).transpose();
  const Mat jac = f.jacobian(x);
  const std::vector<Mat> hess = f.hessians(x);
  Vec out(f.dim());
  for (int k = 0; k < f.dim(); ++k)
    out[k] = 0.5 * a.cwiseProduct(hess[k]).sum() + jac.row(k).dot(mu);
  if (!out.allFinite()) throw NumericError("generator: non-finite value");
  return out;
}

}  // namespace stochsym
