#pragma once

#include <cmath>
#include <vector>

#include "stochsym/catalog.hpp"
#include "stochsym/symmetry.hpp"
#include "stochsym/transform.hpp"

namespace testing {

using stochsym::Mat;
using stochsym::Vec;

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Largest componentwise gap between two group elements.
inline double element_gap(const stochsym::GroupElement& a, const stochsym::GroupElement& b) {
  return std::max({max_abs(a.phi - b.phi), max_abs(a.b - b.b), std::abs(a.eta - b.eta),
                   max_abs(a.h - b.h)});
}

inline double sde_gap(const stochsym::Sde& a, const stochsym::Sde& b, const Vec& x) {
  return std::max(max_abs(a.mu(x) - b.mu(x)), max_abs(a.sigma(x) - b.sigma(x)));
}

inline double infinitesimal_gap(const stochsym::InfinitesimalTransformation& a,
                                const stochsym::InfinitesimalTransformation& b, const Vec& x) {
  return std::max({max_abs(a.y(x) - b.y(x)), max_abs(a.c(x) - b.c(x)), std::abs(a.tau(x) - b.tau(x)),
                   max_abs(a.hh(x) - b.hh(x))});
}

// Catalog entry with CIR's k or OU's c set as requested.
inline std::vector<stochsym::CatalogEntry> catalog_variants(
    stochsym::Derivatives d = stochsym::Derivatives::kFiniteDifference) {
  using stochsym::get_model;
  return {get_model("bessel", {}, d),         get_model("cir", {{"k", -1.0}}, d),
          get_model("cir", {{"k", 0.0}}, d),  get_model("cir", {{"k", 1.0}}, d),
          get_model("ou", {{"c", 0.0}}, d),   get_model("ou", {{"c", -0.5}}, d),
          get_model("twod", {}, d)};
}

}  // namespace testing
