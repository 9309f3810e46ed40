#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stochsym/sde.hpp"
#include "stochsym/transform.hpp"

namespace stochsym {

struct EquationResidual {
  std::string name;
  double max = 0.0;
  double mean = 0.0;
};

struct ResidualReport {
  std::string op;
  std::string model;
  int points = 0;
  int skipped = 0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::vector<EquationResidual> equations;
  // Named scalars that are not residuals (structure constants, G range, flags).
  std::vector<std::pair<std::string, double>> values;

  double value(const std::string& name) const;
  const EquationResidual* equation(const std::string& name) const;
};

// Axis-aligned box with an optional extra acceptance predicate.
struct Box {
  Vec lo;
  Vec hi;
  Domain accept;
};

std::vector<Vec> sample_box(const Box& box, int count, std::uint64_t seed);

ResidualReport check_finite_symmetry(const FiniteTransformation& t, const Sde& sde,
                                     const std::vector<Vec>& points, double tol);

// Residual vectors of the two determining equations at x.
Vec determining_residual_drift(const InfinitesimalTransformation& v, const Sde& sde, const Vec& x);
Mat determining_residual_diffusion(const InfinitesimalTransformation& v, const Sde& sde,
                                   const Vec& x);

ResidualReport check_determining_equations(const InfinitesimalTransformation& v, const Sde& sde,
                                           const std::vector<Vec>& points, double tol);

ResidualReport check_lemma_identities(const InfinitesimalTransformation& v, const Sde& sde,
                                      const ScalarField& f, const std::vector<Vec>& points,
                                      double tol);

// G = L(exp f)/exp f, evaluated as 1/2 |sigma^T grad f|^2 + L f.
double doob_g(const Sde& sde, const ScalarField& frak_h, const Vec& x);

ResidualReport check_quasi_doob(const VectorField& h, const ScalarField& frak_h, const Sde& sde,
                                const std::vector<Vec>& points, double tol);

// For each pair: determining equations of the bracket and least-squares
// structure constants constants[k](i, j) = e^k_ij with
// [V_i, V_j] = sum_k e^k_ij V_k, fitted jointly over all points.

ResidualReport check_algebra_closure(const std::vector<InfinitesimalTransformation>& vs,
                                     const Sde& sde, const std::vector<Vec>& points, double tol,
                                     std::vector<Mat>* constants = nullptr);

// Straightening PDEs for the (id, B, eta, h) factor of t and the strong
// pushforward test. With sde and t_potential, the quasi-Doob variant
// sigma^T grad(V_i(t_potential) + k_i) = 0 is checked as well.
ResidualReport check_straightening(const FiniteTransformation& t,
                                   const std::vector<InfinitesimalTransformation>& vs,
                                   const std::vector<Vec>& points, double tol,
                                   const Sde* sde = nullptr,
                                   const std::optional<ScalarField>& t_potential = std::nullopt);

// Forbidden dependencies of a triangular SDE with reduced block 1..r. The
// residual is |d| / (1 + |coefficient|) over forbidden partials.
ResidualReport check_triangular(const Sde& sde, int r, const std::vector<Vec>& points,
                                double tol = 1e-6);

}  // namespace stochsym
