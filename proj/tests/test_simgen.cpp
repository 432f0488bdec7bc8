#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "zib/simgen.hpp"

using namespace zib;

namespace {

std::pair<double, double> empirical_fractions(const LabeledDataset& d) {
  int n1 = 0, n2 = 0;
  for (int lab : d.label) {
    n1 += lab == 1;
    n2 += lab == 2;
  }
  const double n = static_cast<double>(d.label.size());
  return {n1 / n, n2 / n};
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const ScenarioSpec spec = named_scenario("sim1.1");
  Rng r1(42), r2(42), r3(43);
  const auto [a_train, a_test] = generate(spec, r1);
  const auto [b_train, b_test] = generate(spec, r2);
  const auto [c_train, c_test] = generate(spec, r3);
  CHECK(a_train.data.y == b_train.data.y);
  CHECK(a_train.data.X == b_train.data.X);
  CHECK(a_test.data.y == b_test.data.y);
  CHECK(a_train.label == b_train.label);
  CHECK(a_train.data.y != c_train.data.y);
}

TEST_CASE("label and latent invariants") {
  ScenarioSpec spec = named_scenario("sim2.2");
  Rng rng(7);
  const auto [train, test] = generate(spec, rng);
  for (const LabeledDataset* d : {&train, &test}) {
    CHECK(d->data.coords.has_value());
    CHECK(d->effects_true.has_value());
    for (int i = 0; i < d->data.n(); ++i) {
      const int lab = d->label[i];
      const double y = d->data.y[i];
      const double w = d->w_true[i];
      if (lab == 0) {
        CHECK(y > 0.0);
        CHECK(y == doctest::Approx(w));
      } else if (lab == 1) {
        CHECK(y == 0.0);
        CHECK(std::isnan(w));
      } else {
        CHECK(lab == 2);
        CHECK(y == 0.0);
        CHECK(w <= 0.0);
        CHECK(w > -1.0);
      }
    }
  }
  CHECK(train.data.n() == spec.n_train);
  CHECK(test.data.n() == spec.n_test);
}

TEST_CASE("pure symmetric censoring yields half zeros") {
  ScenarioSpec spec = named_scenario("sim1.1");
  spec.truth.gamma << -40.0, 0.0;  // no unsuitability
  spec.truth.delta << 0.0, 0.0;    // mu = 0.5 everywhere
  spec.n_train = 2000;
  spec.n_test = 10;
  Rng rng(11);
  double frac = 0.0;
  const int reps = 10;
  for (int r = 0; r < reps; ++r) {
    const auto [train, test] = generate(spec, rng);
    frac += empirical_fractions(train).second;
  }
  CHECK(frac / reps == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("baseline scenario hits the published zero mix") {
  const ScenarioSpec spec = named_scenario("sim1.1");
  const auto [unsuit, censored] = expected_zero_fractions(spec);
  CHECK(unsuit == doctest::Approx(0.27).epsilon(1.0).scale(0.015));
  CHECK(censored == doctest::Approx(0.27).epsilon(1.0).scale(0.015));

  Rng rng(13);
  double e1 = 0.0, e2 = 0.0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    ScenarioSpec s = spec;
    s.n_test = 10;
    const auto [train, test] = generate(s, rng);
    const auto [f1, f2] = empirical_fractions(train);
    e1 += f1;
    e2 += f2;
  }
  // 3 SEs for a proportion over reps * n_train draws.
  const double se = std::sqrt(0.27 * 0.73 / (reps * 400.0));
  CHECK(e1 / reps == doctest::Approx(unsuit).epsilon(1.0).scale(3.0 * se));
  CHECK(e2 / reps == doctest::Approx(censored).epsilon(1.0).scale(3.0 * se));
}

TEST_CASE("grid calibration lands on its targets") {
  for (const std::string family : {"table2", "m2", "m3"}) {
    const auto specs = scenario_grid(family);
    const auto targets = grid_targets(family);
    REQUIRE(specs.size() == 9);
    for (size_t k = 0; k < 9; ++k) {
      const auto [unsuit, censored] = expected_zero_fractions(specs[k]);
      CHECK(unsuit == doctest::Approx(targets[k].first).epsilon(1.0).scale(1e-6));
      CHECK(censored == doctest::Approx(targets[k].second).epsilon(1.0).scale(1e-6));
    }
  }
  CHECK_THROWS_AS(scenario_grid("bogus"), UsageError);
}

TEST_CASE("grid cells realize their zero mixes within five points") {
  Rng rng(17);
  const auto specs = scenario_grid("table2");
  const auto targets = grid_targets("table2");
  for (size_t k = 0; k < specs.size(); ++k) {
    double f1 = 0.0, f2 = 0.0;
    const int reps = 10;
    for (int r = 0; r < reps; ++r) {
      ScenarioSpec s = specs[k];
      s.n_test = 10;
      const auto [train, test] = generate(s, rng);
      const auto [a, b] = empirical_fractions(train);
      f1 += a;
      f2 += b;
    }
    CHECK(f1 / reps == doctest::Approx(targets[k].first).epsilon(1.0).scale(0.05));
    CHECK(f2 / reps == doctest::Approx(targets[k].second).epsilon(1.0).scale(0.05));
  }
}

TEST_CASE("spatial truth decays with distance") {
  ScenarioSpec spec = named_scenario("sim3.1");
  spec.n_train = 500;
  spec.n_test = 10;
  Rng rng(19);
  const auto [train, test] = generate(spec, rng);
  const Eigen::VectorXd& eff = *train.effects_true;
  const Eigen::MatrixXd& coords = *train.data.coords;

  // Empirical correlation proxy: average products in distance bands.
  double near = 0.0, far = 0.0;
  int n_near = 0, n_far = 0;
  for (int i = 0; i < 500; ++i)
    for (int j = i + 1; j < 500; ++j) {
      const double d = (coords.row(i) - coords.row(j)).norm();
      if (d < 0.02) {
        near += eff[i] * eff[j];
        ++n_near;
      } else if (d > 0.5) {
        far += eff[i] * eff[j];
        ++n_far;
      }
    }
  REQUIRE(n_near > 20);
  REQUIRE(n_far > 1000);
  // exp(-20 * 0.02) ~ 0.67 within the near band; none beyond ten ranges.
  CHECK(near / n_near > 0.4);
  CHECK(std::fabs(far / n_far) < 0.1);
}

TEST_CASE("scenario misuse is rejected") {
  CHECK_THROWS_AS(named_scenario("sim9.9"), UsageError);
  ScenarioSpec spec = named_scenario("sim1.1");
  spec.n_train = 0;
  Rng rng(23);
  CHECK_THROWS_AS(generate(spec, rng), SpecificationError);
  ScenarioSpec spatial = named_scenario("sim2.1");
  spatial.truth.phi.reset();
  CHECK_THROWS_AS(generate(spatial, rng), SpecificationError);
}
