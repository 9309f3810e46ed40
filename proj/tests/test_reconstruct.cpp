#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "stochsym/catalog.hpp"
#include "stochsym/errors.hpp"
#include "stochsym/reconstruct.hpp"
#include "support.hpp"

using namespace stochsym;
using testing::vec;

namespace {

Sde brownian(int m = 1) {
  return make_sde(VectorField::zero(1, 1), MatrixField::constant(Mat::Ones(1, m), 1));
}

bool within(double value, double se, double target, double k = 3.0) { return std::abs(value - target) <= k * se; }

}  // namespace

TEST_CASE("girsanov weight: zero and constant h") {
  Stream st(1, Leg::kAux, 0);
  const auto p = simulate_em(brownian(), vec({0.0}), 1.0, 1e-2, st);
  CHECK(girsanov_log_weight(p, VectorField::zero(1, 1), GirsanovDirection::kPOverQ) == 0.0);
  CHECK(girsanov_log_weight(p, VectorField::zero(1, 1), GirsanovDirection::kQOverP) == 0.0);

  const double c = -0.8;
  double w = 0.0;
  for (int k = 0; k < p.steps(); ++k) w += p.dw(0, k);
  const auto hc = VectorField::constant(vec({c}), 1);
  CHECK(girsanov_log_weight(p, hc, GirsanovDirection::kQOverP) == doctest::Approx(c * w - 0.5 * c * c).epsilon(1e-12));
  CHECK(girsanov_log_weight(p, hc, GirsanovDirection::kPOverQ) == doctest::Approx(-c * w - 0.5 * c * c).epsilon(1e-12));
  CHECK_THROWS_AS(girsanov_log_weight(p, VectorField::zero(1, 2), GirsanovDirection::kPOverQ), ConfigError);
}

TEST_CASE("girsanov weight is a mean-one martingale") {
  const auto h = VectorField(make_field(1, 1, 1, [](const auto* x, auto* out) {
    using std::sin;
    out[0] = 1.5 * sin(x[0]) + 0.3;
  }));
  const int n = 100000;
  for (const auto dir : {GirsanovDirection::kPOverQ, GirsanovDirection::kQOverP}) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      Stream st(5, Leg::kAux, static_cast<std::uint64_t>(i));
      const auto p = simulate_em(brownian(), vec({0.2}), 1.0, 2e-2, st);
      const double w = std::exp(girsanov_log_weight(p, h, dir));
      s += w;
      s2 += w * w;
    }
    const double mean = s / n;
    CHECK(within(mean, std::sqrt((s2 / n - mean * mean) / n), 1.0));
  }
}

TEST_CASE("plan validation") {
  const auto ou = get_model("ou");
  CHECK_THROWS_AS(make_plan(ou, "", "mean", {1.0}, 1, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(make_plan(ou, "", "mean", {}, 10, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(make_plan(ou, "", "mean", {1.0, 0.5}, 10, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(make_plan(ou, "", "mean", {1.0}, 10, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(make_plan(ou, "", "mean", {-1.0}, 10, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(make_plan(ou, "", "prod", {1.0}, 10, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(make_plan(ou, "", "cube", {1.0}, 10, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(make_plan(ou, "nosuch", "mean", {1.0}, 10, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(make_plan(get_model("bessel"), "", "x2", {1.0}, 10, 1e-3, 1, vec({-1.0, 0.0})), ConfigError);
  CHECK_THROWS_AS(make_plan(ou, "", "mean", {1.0}, 10, 1e-3, 1, vec({1.0})), ConfigError);

  const auto p = make_plan(ou, "", "", {0.5, 1.0}, 10, 1e-3, 1);
  CHECK(p.g.name == "mean");
  CHECK(p.route == "doob");
  CHECK(p.measure_change);
  CHECK_FALSE(p.time_change);
  CHECK(plan_rows(p).size() == 2);
  REQUIRE(p.oracle.size() == 2);
  CHECK(p.oracle[1].has_value());
  CHECK(plan_rows(make_plan(ou, "", "prod", {0.5, 1.0}, 10, 1e-3, 1)).size() == 1);
}

TEST_CASE("direct leg: deterministic and oracle cases") {
  ReconstructionPlan p;
  p.original = make_sde(VectorField::zero(1, 1), MatrixField::constant(Mat::Zero(1, 1), 1));
  p.reduced = p.original;
  p.transform = identity_transformation(1, 1);
  p.g = named_observable("mean");
  p.times = {1.0};
  p.paths = 50;
  p.x0 = vec({2.5});
  p.x0_reduced = p.x0;
  const auto still = estimate_direct(p);
  CHECK(still.estimates[0].value == 2.5);
  CHECK(still.estimates[0].std_error == 0.0);
  CHECK(still.rejected == 0);

  const auto ou = get_model("ou", {{"a", -1.0}, {"b", 0.0}});
  const auto po = make_plan(ou, "", "mean", {1.0}, 100000, 1e-3, 3);
  const auto eo = estimate_direct(po).estimates[0];
  CHECK(eo.value == doctest::Approx(0.3679).epsilon(0.02));
  CHECK(within(eo.value, eo.std_error, std::exp(-1.0)));

  const auto bessel = get_model("bessel", {{"a", 1.0}});
  const auto pb = make_plan(bessel, "quasi_doob", "x2", {1.0}, 100000, 1e-3, 3);
  const auto res = estimate_direct(pb);
  CHECK(within(res.estimates[0].value, res.estimates[0].std_error, 4.0));
  CHECK(res.estimates[0].rejected_frac < 0.01);
  CHECK(res.estimates[0].n_effective == 100000 - res.rejected);
}

TEST_CASE("direct leg: rejection above the cap is an error") {
  const auto bessel = get_model("bessel", {{"a", 0.5}});
  auto p = make_plan(bessel, "quasi_doob", "x2", {1.0}, 2000, 1e-2, 1);
  p.rejection_cap = 0.001;
  CHECK_THROWS_AS(estimate_direct(p), ReliabilityError);
  p.rejection_cap = 1.0;
  const auto res = estimate_direct(p);
  CHECK(res.rejected > 0);
}

TEST_CASE("pure spatial transformation carries unit weights") {
  const auto ou = get_model("ou");
  FiniteTransformation t = identity_transformation(2, 1);
  t.phi.forward = VectorField(make_field(2, 2, 1, [](const auto* x, auto* out) {
    using std::exp;
    out[0] = x[0] * exp(0.5 * x[1]);
    out[1] = x[1];
  }));
  t.phi.inverse = VectorField(make_field(2, 2, 1, [](const auto* x, auto* out) {
    using std::exp;
    out[0] = x[0] * exp(-0.5 * x[1]);
    out[1] = x[1];
  }));
  ReconstructionPlan p = make_plan(ou, "", "mean", {1.0}, 20000, 1e-3, 4);
  p.transform = t;
  p.reduced = transform_sde(t, ou.sde);
  p.measure_change = false;
  p.x0_reduced = t.phi.forward(p.x0);
  const auto rep = run_reconstruction(p);
  CHECK(rep.weights.mean == 1.0);
  CHECK(rep.weights.max == 1.0);
  CHECK(rep.weights.variance == 0.0);
  CHECK(rep.weights.ess == doctest::Approx(20000.0));
  CHECK(std::abs(rep.rows[0].z) <= 3.0);
}

TEST_CASE("OU reconstruction agrees with the direct estimate") {
  const auto ou = get_model("ou", {{"a", -1.0}, {"b", 0.0}});
  const auto rep = run_reconstruction(make_plan(ou, "", "mean", {1.0}, 100000, 1e-3, 7));
  REQUIRE(rep.rows.size() == 1);
  const auto& row = rep.rows[0];
  CHECK(std::abs(row.z) <= 3.0);
  REQUIRE(row.oracle.has_value());
  CHECK(*row.oracle == doctest::Approx(std::exp(-1.0)));
  CHECK(std::abs(*row.z_direct_oracle) <= 3.0);
  CHECK(std::abs(*row.z_reconstructed_oracle) <= 3.0);
  CHECK(row.direct.std_error > 0.0);
  CHECK(row.reconstructed.std_error > 0.0);
  CHECK(rep.weights.ess <= 100000.0);
  CHECK(within(rep.weights.mean, rep.weights.std_error, 1.0));
  CHECK(rep.pass());
}

TEST_CASE("Lamperti route: unit weights and agreement at two times") {
  const auto bessel = get_model("bessel");
  const auto p = make_plan(bessel, "lamperti", "x2", {0.5, 1.0}, 20000, 1e-3, 2);
  CHECK(p.time_change);
  CHECK_FALSE(p.measure_change);
  const auto rep = run_reconstruction(p);
  CHECK(rep.weights.mean == 1.0);
  CHECK(rep.weights.variance == 0.0);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& row : rep.rows) {
    CHECK(std::abs(row.z) <= 3.0);
    CHECK(std::abs(*row.z_reconstructed_oracle) <= 3.0);
  }
}

TEST_CASE("OU two-time product") {
  const auto ou = get_model("ou", {{"a", -1.0}, {"b", 0.0}});
  const auto rep = run_reconstruction(make_plan(ou, "", "prod", {0.5, 1.0}, 100000, 1e-3, 11));
  REQUIRE(rep.rows.size() == 1);
  const auto& row = rep.rows[0];
  CHECK(std::abs(row.z) <= 3.0);
  // For b = 0: E[X_s X_t] = e^{a(t-s)} (x0^2 e^{2as} + (e^{2as} - 1) / (2a)).
  const double truth = std::exp(-0.5) * (std::exp(-1.0) + (std::exp(-1.0) - 1.0) / -2.0);
  CHECK(*row.oracle == doctest::Approx(truth).epsilon(1e-14));
  CHECK(std::abs(*row.z_direct_oracle) <= 3.0);
  CHECK(std::abs(*row.z_reconstructed_oracle) <= 3.0);
}

TEST_CASE("single-time rows share the direct leg") {
  const auto ou = get_model("ou");
  const auto both = run_reconstruction(make_plan(ou, "", "mean", {0.5, 1.0}, 5000, 1e-3, 12));
  const auto early = run_reconstruction(make_plan(ou, "", "mean", {0.5}, 5000, 1e-3, 12));
  const auto late = run_reconstruction(make_plan(ou, "", "mean", {1.0}, 5000, 1e-3, 12));
  CHECK(both.rows[0].direct.value == early.rows[0].direct.value);
  CHECK(both.rows[1].direct.value == late.rows[0].direct.value);
  CHECK(both.rows[1].reconstructed.value == late.rows[0].reconstructed.value);
}

TEST_CASE("catalog weights are mean-one martingales") {
  const std::vector<std::pair<CatalogEntry, std::string>> cases = {
      {get_model("bessel"), "quasi_doob"}, {get_model("cir"), "quasi_doob"},
      {get_model("ou", {{"c", 0.0}}), "doob"}, {get_model("ou", {{"c", -0.5}}), "doob"},
      {get_model("twod"), "rotation"}};
  for (const auto& [e, route] : cases) {
    CAPTURE(e.id);
    const auto res = estimate_reconstructed(make_plan(e, route, "", {1.0}, 20000, 1e-3, 13));
    CHECK(within(res.weights.mean, res.weights.std_error, 1.0));
    CHECK(res.weights.ess <= 20000.0);
    CHECK(res.weights.ess > 0.0);
  }
}

TEST_CASE("reduced clock horizon") {
  const auto bessel = get_model("bessel");
  auto p = make_plan(bessel, "lamperti", "x2", {1.0}, 2000, 1e-3, 14);
  p.reduced_horizon = 0.05;
  CHECK_THROWS_AS(estimate_reconstructed(p), HorizonError);
  // The slowest of these paths needs a reduced clock above 16.
  p.reduced_horizon = 4.0;
  const auto rep = run_reconstruction(p);
  CHECK(rep.reduced_horizon > 16.0);
  CHECK(std::abs(rep.rows[0].z) <= 3.0);
}

TEST_CASE("reports do not depend on the worker count") {
  const auto twod = get_model("twod");
  const auto p = make_plan(twod, "", "mean", {0.5, 1.0}, 3000, 1e-3, 15);
  setenv("STOCHSYM_THREADS", "1", 1);
  const auto one = run_reconstruction(p);
  setenv("STOCHSYM_THREADS", "5", 1);
  const auto five = run_reconstruction(p);
  unsetenv("STOCHSYM_THREADS");
  for (std::size_t r = 0; r < one.rows.size(); ++r) {
    CHECK(one.rows[r].direct.value == five.rows[r].direct.value);
    CHECK(one.rows[r].direct.std_error == five.rows[r].direct.std_error);
    CHECK(one.rows[r].reconstructed.value == five.rows[r].reconstructed.value);
    CHECK(one.rows[r].reconstructed.std_error == five.rows[r].reconstructed.std_error);
  }
  CHECK(one.weights.ess == five.weights.ess);
}

TEST_CASE("z-scores show no trend under dt refinement") {
  const auto ou = get_model("ou");
  const std::vector<double> dts = {4e-3, 2e-3, 1e-3, 5e-4};
  std::vector<double> z;
  for (double dt : dts) {
    const auto rep = run_reconstruction(make_plan(ou, "", "mean", {1.0}, 20000, dt, 16));
    z.push_back(rep.rows[0].z);
    CHECK(std::abs(z.back()) <= 3.0);
  }
  // Least-squares slope of z against log2(dt); sd under no trend is about 0.45.
  const double xs[] = {1.5, 0.5, -0.5, -1.5};
  double num = 0.0, den = 0.0, zbar = 0.0;
  for (double v : z) zbar += v / 4.0;
  for (int i = 0; i < 4; ++i) {
    num += xs[i] * (z[i] - zbar);
    den += xs[i] * xs[i];
  }
  CHECK(std::abs(num / den) < 1.35);
}

TEST_CASE("z_score") {
  CHECK(z_score(1.0, 0.3, 1.0, 0.4) == 0.0);
  CHECK(z_score(2.0, 0.3, 1.0, 0.4) == doctest::Approx(2.0));
  CHECK(z_score(1.0, 0.0, 1.0, 0.0) == 0.0);
  CHECK(std::isinf(z_score(1.5, 0.0, 1.0, 0.0)));
}
