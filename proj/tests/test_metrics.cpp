#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "zib/metrics.hpp"

using namespace zib;

namespace {

PredictiveDist single_component(double pi, double mu, double psi, ModelKind kind) {
  return PredictiveDist::from_components(kind, {PredComponent::make(pi, mu, psi, kind)}, {});
}

}  // namespace

TEST_CASE("monte carlo integrator") {
  Rng rng(1);
  auto one = [](double) { return 1.0; };
  const McResult r1 = mc_integrate(one, 0.0, 1.0, 100, rng);
  CHECK(r1.value == doctest::Approx(1.0));
  CHECK(r1.se == doctest::Approx(0.0));

  auto id = [](double x) { return x; };
  const McResult r2 = mc_integrate(id, 0.0, 1.0, 1000000, rng);
  CHECK(r2.value == doctest::Approx(0.5).epsilon(0.003));
  CHECK(r2.se == doctest::Approx(std::sqrt(1.0 / 12.0 / 1e6)).epsilon(0.05));

  auto bad = [](double) { return std::nan(""); };
  CHECK_THROWS_AS(mc_integrate(bad, 0.0, 1.0, 10, rng), IntegrationError);
}

TEST_CASE("full mixed score: degenerate point mass at zero") {
  // pi ~ 1 concentrates everything at zero.
  PredictiveDist pred = single_component(1.0 - 1e-12, 0.5, 2.0, ModelKind::M1);
  CHECK(pred.p0 == doctest::Approx(1.0));
  Rng rng(2);
  CHECK(crps_full(pred, 0.0, 20000, rng).value == doctest::Approx(0.0).epsilon(1.0).scale(1e-6));
  const McResult at_half = crps_full(pred, 0.5, 20000, rng);
  CHECK(at_half.value == doctest::Approx(1.5).epsilon(1.0).scale(3.0 * at_half.se + 1e-6));
}

TEST_CASE("full mixed score matches a closed-form mixture case") {
  // Hurdle mixture: mass 0.3 at zero, uniform elsewhere. F(x) = 0.3 + 0.7x.
  PredictiveDist pred = single_component(0.3, 0.5, 2.0, ModelKind::BEZI);
  CHECK(pred.p0 == doctest::Approx(0.3));
  const double closed = 0.09 + 0.0800533333 + 0.03528;
  Rng rng(3);
  const McResult got = crps_full(pred, 0.4, 200000, rng);
  CHECK(got.value == doctest::Approx(closed).epsilon(1.0).scale(3.0 * got.se + 1e-6));
}

TEST_CASE("full mixed score agrees with adaptive quadrature branch integrals") {
  Rng rng(4);
  for (int rep = 0; rep < 12; ++rep) {
    const double pi = rng.uniform(0.05, 0.8);
    const double mu = rng.uniform(0.2, 0.8);
    const double psi = rng.uniform(1.0, 8.0);
    PredictiveDist pred = single_component(pi, mu, psi, ModelKind::M1);
    const double y = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.05, 0.9);

    double oracle;
    if (y > 0.0) {
      auto integrand = [&](double x) {
        const double d = pred.cdf(x) - (y < x ? 1.0 : 0.0);
        return d * d;
      };
      oracle = pred.p0 * pred.p0 + test_support::integrate(integrand, 1e-12, y, 1e-10) +
               test_support::integrate(integrand, y, 1.0 - 1e-12, 1e-10);
    } else {
      auto tail = [&](double x) {
        const double d = 1.0 - pred.cdf(x);
        return d * d;
      };
      oracle = (1.0 - pred.p0) * (1.0 - pred.p0) +
               test_support::integrate(tail, 1e-12, 1.0 - 1e-12, 1e-10);
    }
    const McResult got = crps_full(pred, y, 60000, rng);
    CHECK(got.value == doctest::Approx(oracle).epsilon(1.0).scale(3.0 * got.se + 1e-7));
  }
}

TEST_CASE("latent-scale reading of the zero branch") {
  Rng rng(5);
  PredictiveDist pred = single_component(0.4, 0.6, 3.0, ModelKind::M1);
  auto tail = [&](double x) {
    const double d = 1.0 - pred.latent_cdf(x);
    return d * d;
  };
  const double oracle = (1.0 - pred.p0) * (1.0 - pred.p0) +
                        test_support::integrate(tail, -1.0 + 1e-12, -1e-12, 1e-10);
  const McResult got = crps_full(pred, 0.0, 60000, rng, CrpsZeroBranch::latent);
  CHECK(got.value == doctest::Approx(oracle).epsilon(1.0).scale(3.0 * got.se + 1e-7));
  // The two readings are genuinely different quantities.
  const McResult bounded = crps_full(pred, 0.0, 60000, rng, CrpsZeroBranch::bounded);
  CHECK(std::fabs(bounded.value - got.value) > 10.0 * (bounded.se + got.se));
}

TEST_CASE("hurdle score") {
  // Uniform positive part at its median.
  PredictiveDist pred = single_component(0.3, 0.5, 2.0, ModelKind::BEZI);
  Rng rng(6);
  const McResult got = crps_hurdle(pred, 0.5, 200000, rng);
  CHECK(got.value == doctest::Approx(1.0 / 12.0).epsilon(1.0).scale(3.0 * got.se + 1e-5));
  CHECK_THROWS_AS(crps_hurdle(pred, 0.0, 100, rng), MetricError);

  // Minimized near the predictive median.
  PredictiveDist skew = single_component(0.0, 0.3, 5.0, ModelKind::BEZI);
  const double med = 0.2818;  // Beta(1.5, 3.5) median, precomputed
  double at_med = crps_hurdle(skew, med, 100000, rng).value;
  CHECK(at_med < crps_hurdle(skew, med - 0.15, 100000, rng).value);
  CHECK(at_med < crps_hurdle(skew, med + 0.15, 100000, rng).value);
}

TEST_CASE("sample-based oracle") {
  CHECK(crps_sample_oracle({0.4, 0.4, 0.4}, 0.4) == doctest::Approx(0.0));
  CHECK(crps_sample_oracle({0.0, 1.0}, 0.0) == doctest::Approx(0.25));

  Rng rng(7);
  std::vector<double> unif(100000);
  for (double& u : unif) u = rng.uniform();
  CHECK(crps_sample_oracle(unif, 0.5) == doctest::Approx(1.0 / 12.0).epsilon(1.0).scale(0.002));

  // Fast pair-sum formula vs brute force on a small ensemble.
  std::vector<double> small(200);
  for (double& u : small) u = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
  const double y = 0.37;
  double t1 = 0.0, t2 = 0.0;
  for (double a : small) t1 += std::fabs(a - y);
  for (double a : small)
    for (double b : small) t2 += std::fabs(a - b);
  const double brute = t1 / small.size() - 0.5 * t2 / (small.size() * small.size());
  CHECK(crps_sample_oracle(small, y) == doctest::Approx(brute).epsilon(1e-10));
}

TEST_CASE("sample oracle converges to the hurdle score when p0 = 0") {
  PredictiveDist pred = single_component(0.0, 0.4, 4.0, ModelKind::BEZI);
  Rng rng(8);
  std::vector<double> draws(100000);
  for (double& d : draws) d = sample_beta(rng, BetaMS(0.4, 4.0));
  const double oracle = crps_sample_oracle(draws, 0.55);
  const McResult direct = crps_hurdle(pred, 0.55, 200000, rng);
  CHECK(oracle == doctest::Approx(direct.value).epsilon(1.0).scale(3.0 * direct.se + 0.003));
}

TEST_CASE("coefficient of discrimination") {
  CHECK(tjur_r2({1.0, 1.0, 0.0, 0.0}, {1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(tjur_r2({0.7, 0.7, 0.7, 0.7}, {1, 0, 1, 0}) == doctest::Approx(0.0));
  CHECK(tjur_r2({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == doctest::Approx(0.7));
  // Swapping class labels negates the statistic.
  CHECK(tjur_r2({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}) == doctest::Approx(-0.7));
  CHECK_THROWS_AS(tjur_r2({0.5, 0.5}, {1, 1}), MetricError);
}

TEST_CASE("roc and auc") {
  const RocResult perfect = roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
  CHECK(perfect.auc == doctest::Approx(1.0));
  CHECK(perfect.curve.front() == std::pair<double, double>{0.0, 0.0});
  CHECK(perfect.curve.back() == std::pair<double, double>{1.0, 1.0});

  CHECK(roc_auc({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0}).auc == doctest::Approx(0.5));
  CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {0, 0}), MetricError);

  Rng rng(9);
  std::vector<double> scores(200);
  std::vector<int> labels(200);
  for (int i = 0; i < 200; ++i) {
    labels[i] = rng.uniform() < 0.4;
    scores[i] = std::round(rng.uniform(0.0, 10.0)) / 10.0 + 0.3 * labels[i];
  }
  // Mann-Whitney pair count with half-credit ties.
  double pairs = 0.0;
  int n1 = 0, n0 = 0;
  for (int i = 0; i < 200; ++i) {
    if (labels[i] == 0) continue;
    ++n1;
    for (int j = 0; j < 200; ++j) {
      if (labels[j] == 1) continue;
      pairs += scores[i] > scores[j] ? 1.0 : (scores[i] == scores[j] ? 0.5 : 0.0);
    }
  }
  n0 = 200 - n1;
  const double mw = pairs / (double(n1) * n0);
  const RocResult got = roc_auc(scores, labels);
  CHECK(got.auc == doctest::Approx(mw).epsilon(1e-12));

  // Invariant under strictly monotone transforms.
  std::vector<double> warped = scores;
  for (double& s : warped) s = std::exp(3.0 * s);
  CHECK(roc_auc(warped, labels).auc == doctest::Approx(got.auc).epsilon(1e-12));
}

TEST_CASE("single-sample predictive equals the analytic mixture") {
  ChainOutput chain;
  chain.kind = ModelKind::M1;
  chain.names = {"gamma_0", "delta_0", "log_psi"};
  chain.samples.resize(1, 3);
  chain.samples << -1.25, 0.5, std::log(1.5);

  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(1, 1);
  PredictOptions opts;
  opts.ensemble_per_sample = 8;
  const auto preds = predictive_at_sites(chain, X, X, std::nullopt, std::nullopt, opts);
  REQUIRE(preds.size() == 1);

  const double pi = link_logit_inv(-1.25);
  const double mu = link_logit_inv(0.5);
  const double expect = pi + (1.0 - pi) * beta_cdf(0.5, BetaMS(mu, 1.5));
  CHECK(preds[0].p0 == doctest::Approx(expect).epsilon(1e-12));
  CHECK(preds[0].cdf(0.5) ==
        doctest::Approx(expect + (1.0 - pi) * (beta_cdf(0.75, BetaMS(mu, 1.5)) -
                                               beta_cdf(0.5, BetaMS(mu, 1.5)))));
  CHECK(preds[0].ensemble.size() == 8);
}

TEST_CASE("predictive mass balance and monotone cdf") {
  Rng rng(10);
  ChainOutput chain;
  chain.kind = ModelKind::M1;
  chain.names = {"gamma_0", "gamma_1", "delta_0", "delta_1", "log_psi"};
  chain.samples.resize(30, 5);
  for (int r = 0; r < 30; ++r)
    chain.samples.row(r) << rng.normal(-1.0, 0.3), rng.normal(0.7, 0.2), rng.normal(0.5, 0.2),
        rng.normal(-0.5, 0.2), rng.normal(0.4, 0.1);

  Eigen::MatrixXd X(3, 2), G(3, 2);
  X << 1, 0.4, 1, -1.2, 1, 2.0;
  G << 1, -0.3, 1, 0.8, 1, 1.5;
  const auto preds = predictive_at_sites(chain, X, G, std::nullopt, std::nullopt);
  for (const auto& p : preds) {
    CHECK(p.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-9));
    double prev = p.p0;
    for (int k = 1; k <= 20; ++k) {
      const double c = p.cdf(k / 21.0);
      CHECK(c >= prev - 1e-12);
      prev = c;
    }
    CHECK(p.source_prob() > 0.0);
    CHECK(p.source_prob() < 1.0);
  }
}

TEST_CASE("spatial predictive interpolates at a training site") {
  ChainOutput chain;
  chain.kind = ModelKind::M2;
  chain.names = {"gamma_0", "delta_0", "log_psi", "phi", "eff_0", "eff_1"};
  chain.samples.resize(1, 6);
  chain.samples << -1.0, 0.3, std::log(2.0), 0.5, 0.9, -0.6;

  Eigen::MatrixXd train_coords(2, 2);
  train_coords << 0, 0, 10, 10;
  Eigen::MatrixXd new_coords(1, 2);
  new_coords << 0, 0;  // coincides with training site 0
  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(1, 1);

  const auto preds =
      predictive_at_sites(chain, X, X, new_coords, train_coords, PredictOptions{});
  REQUIRE(preds.size() == 1);
  CHECK(preds[0].comps[0].mu == doctest::Approx(link_logit_inv(0.3 + 0.9)).epsilon(1e-4));
}
