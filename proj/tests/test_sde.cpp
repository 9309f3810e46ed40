#include <doctest.h>

#include <cmath>

#include "stochsym/catalog.hpp"
#include "stochsym/errors.hpp"
#include "stochsym/path.hpp"
#include "stochsym/sde.hpp"
#include "stochsym/symmetry.hpp"
#include "support.hpp"

using namespace stochsym;
using testing::vec;

namespace {

Sde constant_sde(int n, int m, const Vec& mu, const Mat& sigma) {
  return make_sde(VectorField::constant(mu, n), MatrixField::constant(sigma, n));
}

Sde bessel_sde(double a) {
  return make_sde(VectorField(make_field(2, 2, 1,
                                         [a](const auto* x, auto* out) {
                                           out[0] = a / x[0];
                                           out[1] = 1.0;
                                         })),
                  MatrixField(make_field(2, 2, 1,
                                         [](const auto*, auto* out) {
                                           out[0] = 1.0;
                                           out[1] = 0.0;
                                         })),
                  [](const double* x) { return x[0] > 0.0; });
}

Sde ou_sde(double a, double b, bool analytic = true) {
  return make_sde(VectorField(make_field(
                      2, 2, 1,
                      [a, b](const auto* x, auto* out) {
                        out[0] = a * x[0] + b;
                        out[1] = 1.0;
                      },
                      analytic)),
                  MatrixField(make_field(
                      2, 2, 1,
                      [](const auto*, auto* out) {
                        out[0] = 1.0;
                        out[1] = 0.0;
                      },
                      analytic)));
}

ScalarField scalar(int n, auto fn, bool analytic = true) { return ScalarField(make_field(n, 1, 1, fn, analytic)); }

}  // namespace

TEST_CASE("generator on hand-expanded examples") {
  const auto x2 = [](const auto* x, auto* out) { out[0] = x[0] * x[0]; };
  for (bool analytic : {true, false}) {
    CAPTURE(analytic);
    const Sde bessel = bessel_sde(1.0);
    // 1/2 * 2 + (a/x) * 2x = 1 + 2a
    CHECK(generator_apply(bessel, scalar(2, x2, analytic), vec({1.0, 1.0})) ==
          doctest::Approx(3.0).epsilon(1e-9));
    CHECK(generator_apply(bessel, ScalarField::constant(2, 4.2), vec({1.3, 0.2})) ==
          doctest::Approx(0.0));
    const auto ident = [](const auto* x, auto* out) { out[0] = x[0]; };
    CHECK(generator_apply(ou_sde(1.0, 1.0), scalar(2, ident, analytic), vec({2.0, 0.0})) ==
          doctest::Approx(3.0).epsilon(1e-9));
  }
}

TEST_CASE("generator outside the domain raises") {
  const Sde bessel = bessel_sde(1.0);
  CHECK_THROWS_AS(generator_apply(bessel, ScalarField::constant(2, 1.0), vec({-1.0, 0.0})), DomainError);
}

TEST_CASE("generator: analytic and finite-difference derivatives agree on the catalog") {
  const auto f = [](const auto* x, auto* out) {
    using std::sin;
    out[0] = x[0] * x[0] + 0.5 * x[0] * x[1] + sin(x[1]);
  };
  for (const auto& id : model_ids()) {
    const auto fd = get_model(id, {}, Derivatives::kFiniteDifference);
    const auto an = get_model(id, {}, Derivatives::kAnalytic);
    const int n = fd.sde.n;
    const auto f_fd = scalar(n, f, false);
    const auto f_an = scalar(n, f, true);
    for (const auto& x : sample_box(fd.test_box, 100, 5)) {
      const double a = generator_apply(an.sde, f_an, x);
      const double b = generator_apply(fd.sde, f_fd, x);
      CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("simulate_em: deterministic cases") {
  Stream s(1, Leg::kAux, 0);
  const auto still = simulate_em(constant_sde(1, 1, vec({0.0}), Mat::Zero(1, 1)), vec({0.7}), 1.0, 0.1, s);
  CHECK(still.steps() == 10);
  CHECK(testing::max_abs(still.states.array() - 0.7) == 0.0);

  const auto drift = simulate_em(constant_sde(1, 1, vec({1.0}), Mat::Zero(1, 1)), vec({0.5}), 1.0, 0.1, s);
  CHECK(drift.states(0, drift.steps()) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(drift.log_weight.front() == 0.0);
  CHECK(drift.clock == drift.times);
}

TEST_CASE("uniform grid shortens the last step") {
  const auto g = uniform_grid(1.05, 0.1);
  CHECK(g.size() == 12);
  CHECK(g.back() == 1.05);
  CHECK(g[10] == doctest::Approx(1.0));
  CHECK_THROWS_AS(uniform_grid(1.0, 0.0), ConfigError);
}

TEST_CASE("simulate_em: OU mean matches the exponential decay") {
  const Sde ou = ou_sde(-1.0, 0.0);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    Stream st(3, Leg::kAux, static_cast<std::uint64_t>(i));
    const auto p = simulate_em(ou, vec({1.0, 0.0}), 1.0, 1e-3, st);
    const double x = p.states(0, p.steps());
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - std::exp(-1.0)) <= 3.0 * se);
}

TEST_CASE("simulate_em: first-order convergence on the OU drift") {
  const Sde ode = make_sde(VectorField(make_field(1, 1, 1, [](const auto* x, auto* out) { out[0] = -x[0]; })),
                           MatrixField::constant(Mat::Zero(1, 1), 1));
  auto error = [&](double dt) {
    Stream st(1, Leg::kAux, 0);
    const auto p = simulate_em(ode, vec({1.0}), 1.0, dt, st);
    return std::abs(p.states(0, p.steps()) - std::exp(-1.0));
  };
  const double ratio = error(1e-2) / error(1e-3);
  CHECK(ratio == doctest::Approx(10.0).epsilon(0.3));
}

TEST_CASE("simulate_em: Bessel paths rarely leave the half-line") {
  const Sde bessel = bessel_sde(1.0);
  const int n = 20000;
  int rejected = 0;
  for (int i = 0; i < n; ++i) {
    Stream st(9, Leg::kAux, static_cast<std::uint64_t>(i));
    const auto p = simulate_em(bessel, vec({1.0, 0.0}), 1.0, 1e-3, st);
    if (p.rejected) {
      ++rejected;
      CHECK(p.rejected_at == p.steps());
      CHECK(p.states(0, p.steps()) <= 0.0);
    }
  }
  CHECK(rejected < 0.001 * n);
}

TEST_CASE("simulate_em rejects a start outside the domain") {
  Stream st(1, Leg::kAux, 0);
  CHECK_THROWS_AS(simulate_em(bessel_sde(1.0), vec({-1.0, 0.0}), 1.0, 0.1, st), DomainError);
}

TEST_CASE("time change forward and inverse") {
  Stream st(5, Leg::kAux, 1);
  const Sde bessel = bessel_sde(1.0);
  const auto path = simulate_em(bessel, vec({1.0, 0.0}), 1.0, 1e-2, st);
  REQUIRE_FALSE(path.rejected);

  const auto same = time_change_forward(path, ScalarField::constant(2, 1.0));
  for (int k = 0; k <= path.steps(); ++k) CHECK(same.clock[k] == doctest::Approx(path.times[k]).epsilon(1e-14));

  const auto doubled = time_change_forward(path, ScalarField::constant(2, 2.0));
  for (int k = 0; k <= path.steps(); ++k) CHECK(doubled.clock[k] == doctest::Approx(2.0 * path.times[k]));
  CHECK(time_change_inverse(doubled, 1.0) == doctest::Approx(0.5));
  CHECK(time_change_inverse(same, 0.37) == doctest::Approx(0.37));

  // Left Riemann sum of 1/x^2, re-summed by hand.
  const auto inv_sq = scalar(2, [](const auto* x, auto* out) { out[0] = 1.0 / (x[0] * x[0]); });
  const auto tc = time_change_forward(path, inv_sq);
  double acc = 0.0;
  for (int k = 0; k < path.steps(); ++k) {
    const double x = path.states(0, k);
    acc += (path.times[k + 1] - path.times[k]) / (x * x);
    CHECK(tc.clock[k + 1] == doctest::Approx(acc).epsilon(1e-13));
    CHECK(tc.clock[k + 1] >= tc.clock[k]);
  }
  for (int k = 0; k <= path.steps(); ++k) CHECK(std::abs(time_change_inverse(tc, tc.clock[k]) - tc.times[k]) <= 1e-12);
  CHECK_THROWS_AS(time_change_inverse(tc, tc.clock.back() + 1e-6), RangeError);

  CHECK_THROWS_AS(time_change_forward(path, ScalarField::constant(2, 0.0)), DomainError);
}

TEST_CASE("evaluate_at picks the left node") {
  Stream st(2, Leg::kAux, 0);
  const auto p = simulate_em(ou_sde(-1.0, 0.0), vec({1.0, 0.0}), 1.0, 0.1, st);
  CHECK(evaluate_at(p, 0.0) == p.state(0));
  CHECK(evaluate_at(p, p.times[3]) == p.state(3));
  CHECK(evaluate_at(p, 0.35) == p.state(3));
  CHECK(evaluate_at(p, 1.0) == p.state(10));
  CHECK_THROWS_AS(evaluate_at(p, 1.2), RangeError);
  CHECK_THROWS_AS(evaluate_at(p, -0.1), RangeError);
}
