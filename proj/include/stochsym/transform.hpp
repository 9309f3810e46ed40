#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "stochsym/field.hpp"
#include "stochsym/path.hpp"
#include "stochsym/sde.hpp"

namespace stochsym {

struct Diffeomorphism {
  VectorField forward;
  VectorField inverse;
};

// T = (Phi, B, eta, h): space map, SO(m) rotation of the noise, time-change
// density and Girsanov drift. B, eta and h live on the source space.
struct FiniteTransformation {
  Diffeomorphism phi;
  MatrixField b;
  ScalarField eta;
  VectorField h;

  int n() const { return phi.forward.in_dim(); }
  int m() const { return b.rows(); }
};

// V = (Y, C, tau, H) with an optional quasi-Doob potential k, H = sigma^T grad k.
struct InfinitesimalTransformation {
  VectorField y;
  MatrixField c;
  ScalarField tau;
  VectorField hh;
  std::optional<ScalarField> k;

  int n() const { return y.dim(); }
  int m() const { return c.rows(); }
};

// Pointwise value of a group element (B, eta, h) together with Phi(x).
struct GroupElement {
  Vec phi;
  Mat b;
  double eta = 1.0;
  Vec h;
};

FiniteTransformation identity_transformation(int n, int m);
InfinitesimalTransformation zero_infinitesimal(int n, int m);
// V = (Y, 0, 0, 0).
InfinitesimalTransformation strong_infinitesimal(VectorField y, int m);

// outer o inner, with chain-rule derivatives when both carry analytic ones.
Field compose_fields(const Field& outer, const VectorField& inner);

// Pointwise components of T at x.
GroupElement evaluate(const FiniteTransformation& t, const Vec& x);

Sde transform_sde(const FiniteTransformation& t, const Sde& sde, Domain image = nullptr);
DiscretePath transform_path(const FiniteTransformation& t, const DiscretePath& path, const Sde& sde);

FiniteTransformation compose(const FiniteTransformation& t2, const FiniteTransformation& t1);
FiniteTransformation invert(const FiniteTransformation& t);

InfinitesimalTransformation pushforward(const FiniteTransformation& t,
                                        const InfinitesimalTransformation& v);
InfinitesimalTransformation lie_bracket(const InfinitesimalTransformation& v1,
                                        const InfinitesimalTransformation& v2);

// Integrates the group ODEs from the identity up to parameter a with RK4.
GroupElement one_parameter_group(const InfinitesimalTransformation& v, double a, const Vec& x);
// RK4 flow of a vector field with an explicit step count.
Vec flow_point(const VectorField& y, double a, const Vec& x, int steps);
int flow_steps(double a);

// T_a as a finite transformation; every component re-integrates the flow.
FiniteTransformation flow_transformation(const InfinitesimalTransformation& v, double a);

// Coordinates straightening the given fields near base. The inverse is
// F(a) = Phi^1_{a_1} o ... o Phi^n_{a_n}(base) (fields completed to n with
// coordinate directions), the forward map solves F(a) = x by damped Newton.
Diffeomorphism canonical_map(const std::vector<VectorField>& fields, const Vec& base);

}  // namespace stochsym
