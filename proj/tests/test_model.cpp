#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "mfcl/model.hpp"

using namespace mfcl;

namespace {

MeanFieldModel base_model() {
  MeanFieldModel m;
  m.alpha = 0.25;
  m.beta1 = 0.1;
  m.beta2 = 0.5;
  m.gamma = 0.0;
  m.sigma = 1.0;
  m.c = 1.0;
  m.n = 2.0;
  m.T = 1.0;
  m.R0 = 0.0;
  m.m0 = 0.0;
  m.v0 = 0.0;
  return m;
}

std::string thrown_message(const MeanFieldModel& m) {
  try {
    validate(m);
  } catch (const validation_error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("validate accepts a fully specified in-range model") {
  MeanFieldModel m = base_model();
  CHECK_NOTHROW(validate(m));
  // Idempotent: a validated model revalidates unchanged.
  const MeanFieldModel& again = validate(validate(m));
  CHECK(again.alpha == m.alpha);
}

TEST_CASE("validate rejects out-of-range parameters by name") {
  MeanFieldModel m = base_model();
  m.alpha = 0.5;
  CHECK(thrown_message(m) == "alpha must lie in [0, 0.5)");
  m = base_model();
  m.n = 1.0;
  CHECK(thrown_message(m) == "n must exceed 1");
  m = base_model();
  m.beta1 = -0.1;
  CHECK(thrown_message(m) == "beta1 must be nonnegative");
  m = base_model();
  m.beta2 = -1.0;
  CHECK(thrown_message(m) == "beta2 must be nonnegative");
  m = base_model();
  m.gamma = -1e-9;
  CHECK(thrown_message(m) == "gamma must be nonnegative");
  m = base_model();
  m.sigma = 0.0;
  CHECK(thrown_message(m) == "sigma must be positive");
  m = base_model();
  m.c = -2.0;
  CHECK(thrown_message(m) == "c must be positive");
  m = base_model();
  m.T = -1.0;
  CHECK(thrown_message(m) == "T must be nonnegative");
  m = base_model();
  m.v0 = -0.5;
  CHECK(thrown_message(m) == "v0 must be nonnegative");
  m = base_model();
  m.m0 = std::nan("");
  CHECK(thrown_message(m) == "m0 must be finite");
}

TEST_CASE("penalty validation") {
  Penalties p{0.2, 0.2, 0.2};
  CHECK_NOTHROW(validate(p));
  p.lambda_xi = -0.1;
  CHECK_THROWS_AS(validate(p), validation_error);
}

TEST_CASE("kappa is the sum of the two drift couplings") {
  MeanFieldModel m = base_model();
  m.alpha = 0.0;
  m.beta1 = 0.0;
  CHECK(kappa(m) == 0.0);
  m.alpha = 0.25;
  m.beta1 = 0.1;
  CHECK(kappa(m) == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(kappa(validate(m)) >= 0.0);
}

TEST_CASE("branch detection covers the four regimes") {
  MeanFieldModel m = base_model();
  m.alpha = 0.0;
  m.beta1 = 0.0;
  CHECK(branch_of(m) == Branch::kappa_zero);
  m.beta1 = 0.3;
  CHECK(branch_of(m) == Branch::alpha_zero);
  m.alpha = 0.25;
  m.beta1 = 0.25;
  CHECK(branch_of(m) == Branch::alpha_equals_beta1);
  CHECK(kappa(m) == doctest::Approx(0.5).epsilon(1e-15));
  m.beta1 = 0.1;
  CHECK(branch_of(m) == Branch::generic);
  CHECK(std::string(branch_name(Branch::alpha_equals_beta1)) ==
        "alpha_equals_beta1");

  // The detection threshold is absolute at 1e-12.
  m.alpha = 0.25;
  m.beta1 = 0.25 + 5e-13;
  CHECK(branch_of(m) == Branch::alpha_equals_beta1);
  m.beta1 = 0.25 + 1e-11;
  CHECK(branch_of(m) == Branch::generic);
}

TEST_CASE("time grid spacing is uniform and exact at the ends") {
  TimeGrid g(1.0, 1000);
  CHECK(g.num_points() == 1001);
  CHECK(g.point(0) == 0.0);
  CHECK(g.point(1000) == 1.0);
  CHECK(g.dt() * g.steps == doctest::Approx(g.T).epsilon(1e-15));
  for (int k = 1; k <= g.steps; ++k)
    CHECK(g.point(k) - g.point(k - 1) ==
          doctest::Approx(g.dt()).epsilon(1e-12));

  TimeGrid empty(0.0, 17);
  CHECK(empty.steps == 0);
  CHECK(empty.num_points() == 1);

  CHECK_THROWS_AS(TimeGrid(1.0, 0), validation_error);
  CHECK_THROWS_AS(TimeGrid(-1.0, 10), validation_error);
}

TEST_CASE("curves interpolate linearly and clamp at the ends") {
  TimeGrid g(2.0, 4);
  DeterministicCurve c =
      DeterministicCurve::from_function(g, [](double t) { return 3.0 * t; });
  CHECK(c(0.0) == 0.0);
  CHECK(c(2.0) == 6.0);
  CHECK(c(0.25) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(c(1.999999) == doctest::Approx(5.999997).epsilon(1e-12));
  CHECK(c(-1.0) == 0.0);
  CHECK(c(5.0) == 6.0);

  DeterministicCurve d =
      DeterministicCurve::from_function(g, [](double t) { return 3.0 * t + 1.0; });
  CHECK(c.sup_distance(d) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(DeterministicCurve(g, std::vector<double>(3, 0.0)),
                  validation_error);
}

TEST_CASE("degenerate one-point curve evaluates everywhere") {
  TimeGrid g(0.0, 0);
  DeterministicCurve c(g, std::vector<double>{7.0});
  CHECK(c(0.0) == 7.0);
  CHECK(c(1.0) == 7.0);
}
