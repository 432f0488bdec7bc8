#include "zib/simgen.hpp"

#include <cmath>
#include <limits>

#include "zib/spatial.hpp"

namespace zib {

namespace {

// E[f(c + sd * T)] for T ~ N(0,1), by weighted trapezoid over +-8 sd.
template <class F>
double normal_expectation(double c, double sd, F&& f) {
  constexpr int kPoints = 801;
  constexpr double kHalfWidth = 8.0;
  const double h = 2.0 * kHalfWidth / (kPoints - 1);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double t = -kHalfWidth + i * h;
    double w = std::exp(-0.5 * t * t);
    if (i == 0 || i == kPoints - 1) w *= 0.5;
    num += w * f(c + sd * t);
    den += w;
  }
  return num / den;
}

double solve_monotone(double target, const std::function<double(double)>& f) {
  double lo = -12.0, hi = 12.0;
  if (f(lo) > target || f(hi) < target)
    throw SpecificationError("calibrate_intercepts: target outside attainable range");
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ScenarioSpec make_scenario(const std::string& name, ModelKind kind, double g0, double g1,
                           double d0, double d1, double psi, double phi = 0.0) {
  ScenarioSpec s;
  s.name = name;
  s.kind = kind;
  s.truth.gamma = Eigen::Vector2d(g0, g1);
  s.truth.delta = Eigen::Vector2d(d0, d1);
  s.truth.psi = psi;
  if (is_spatial(kind)) {
    s.truth.phi = phi;
    // Unit square, so phi = 20 gives an effective range of 15% of the
    // domain; on a wider region the effects would be uncorrelated at
    // every realized distance and the decay unidentifiable.
    s.region = 1.0;
  }
  return s;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> generate(const ScenarioSpec& spec, Rng& rng) {
  if (spec.n_train < 1 || spec.n_test < 1 || !(spec.region > 0.0))
    throw SpecificationError("generate: invalid scenario sizes");
  const bool spatial = is_spatial(spec.kind);
  if (spatial && !spec.truth.phi)
    throw SpecificationError("generate: spatial scenario requires phi");
  const int px = static_cast<int>(spec.truth.gamma.size());
  const int pg = static_cast<int>(spec.truth.delta.size());
  const int n = spec.n_train + spec.n_test;

  Dataset all;
  all.y.resize(n);
  all.X.resize(n, px);
  all.G.resize(n, pg);
  all.X.col(0).setOnes();
  all.G.col(0).setOnes();
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j < px; ++j) all.X(i, j) = rng.normal();
    for (int j = 1; j < pg; ++j) all.G(i, j) = rng.normal();
  }

  Eigen::VectorXd effects = Eigen::VectorXd::Zero(n);
  if (spatial) {
    Eigen::MatrixXd coords(n, 2);
    for (int i = 0; i < n; ++i) {
      coords(i, 0) = rng.uniform(0.0, spec.region);
      coords(i, 1) = rng.uniform(0.0, spec.region);
    }
    all.coords = coords;
    // Train and test effects drawn jointly for coherent truth.
    const GPFactor F = chol_jitter(exp_covariance(distance_matrix(coords), *spec.truth.phi));
    effects = gp_prior_draw(rng, F);
  }

  std::vector<int> label(n);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    double eta_pi = all.X.row(i).dot(spec.truth.gamma);
    double eta_mu = all.G.row(i).dot(spec.truth.delta);
    if (spec.kind == ModelKind::M3) eta_pi += effects[i];
    if (spec.kind == ModelKind::M2) eta_mu += effects[i];
    const double pi = link_logit_inv(eta_pi);
    const double mu = link_logit_inv(eta_mu);
    if (rng.uniform() < pi) {
      label[i] = 1;
      all.y[i] = 0.0;
      w[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double v = sample_beta(rng, BetaMS(mu, spec.truth.psi));
      w[i] = 2.0 * v - 1.0;
      if (w[i] > 0.0) {
        label[i] = 0;
        all.y[i] = w[i];
      } else {
        label[i] = 2;
        all.y[i] = 0.0;
      }
    }
  }

  auto slice = [&](int begin, int count) {
    LabeledDataset out;
    out.data.y = all.y.segment(begin, count);
    out.data.X = all.X.middleRows(begin, count);
    out.data.G = all.G.middleRows(begin, count);
    if (all.coords) out.data.coords = all.coords->middleRows(begin, count);
    out.label.assign(label.begin() + begin, label.begin() + begin + count);
    out.w_true = w.segment(begin, count);
    if (spatial) out.effects_true = effects.segment(begin, count);
    return out;
  };
  return {slice(0, spec.n_train), slice(spec.n_train, spec.n_test)};
}

ScenarioSpec named_scenario(const std::string& name) {
  // Nonspatial proof-of-concept scenarios.
  if (name == "sim1.1") return make_scenario(name, ModelKind::M1, -1.25, 0.75, 0.5, -0.5, 1.5);
  if (name == "sim1.2") return make_scenario(name, ModelKind::M1, -2.50, 0.75, 0.5, -0.5, 1.5);
  if (name == "sim1.3") return make_scenario(name, ModelKind::M1, -0.50, 0.75, 1.25, -0.5, 1.5);
  // Spatial effect in the Beta mean.
  if (name == "sim2.1") return make_scenario(name, ModelKind::M2, -2.5, 0.75, 1.25, -1.0, 2.0, 20.0);
  if (name == "sim2.2") return make_scenario(name, ModelKind::M2, -1.5, 0.75, 0.75, -1.0, 2.0, 20.0);
  if (name == "sim2.3") return make_scenario(name, ModelKind::M2, -1.0, 0.75, 1.75, -1.0, 2.0, 20.0);
  // Spatial effect in the zero probability.
  if (name == "sim3.1") return make_scenario(name, ModelKind::M3, -2.5, 0.75, 1.0, -1.0, 2.0, 20.0);
  if (name == "sim3.2") return make_scenario(name, ModelKind::M3, -1.5, 0.75, 1.0, -1.0, 2.0, 20.0);
  if (name == "sim3.3") return make_scenario(name, ModelKind::M3, -1.0, 0.75, 1.5, -1.0, 2.0, 20.0);
  throw UsageError("unknown scenario '" + name + "'");
}

std::vector<std::pair<double, double>> grid_targets(const std::string& family) {
  if (family == "table2") {
    return {{0.14, 0.10}, {0.11, 0.12}, {0.06, 0.17}, {0.34, 0.14}, {0.24, 0.26},
            {0.09, 0.32}, {0.61, 0.11}, {0.37, 0.37}, {0.23, 0.47}};
  }
  if (family == "m2") {
    return {{0.14, 0.08}, {0.12, 0.13}, {0.06, 0.21}, {0.38, 0.15}, {0.23, 0.25},
            {0.09, 0.45}, {0.64, 0.12}, {0.38, 0.42}, {0.12, 0.60}};
  }
  if (family == "m3") {
    return {{0.18, 0.07}, {0.12, 0.16}, {0.08, 0.17}, {0.33, 0.13}, {0.24, 0.23},
            {0.12, 0.37}, {0.66, 0.08}, {0.41, 0.38}, {0.11, 0.63}};
  }
  throw UsageError("unknown grid family '" + family + "' (expected table2|m2|m3)");
}

std::pair<double, double> calibrate_intercepts(double target_unsuitable, double target_censored,
                                               double slope_pi, double slope_mu, double psi,
                                               bool effect_in_pi, bool effect_in_mu) {
  const double sd_pi = std::sqrt(slope_pi * slope_pi + (effect_in_pi ? 1.0 : 0.0));
  const double sd_mu = std::sqrt(slope_mu * slope_mu + (effect_in_mu ? 1.0 : 0.0));

  const double gamma0 = solve_monotone(target_unsuitable, [&](double c) {
    return normal_expectation(c, sd_pi, [](double s) { return link_logit_inv(s); });
  });
  // E[(1-pi) P(V <= 0.5)] factorizes: the two predictors are independent.
  const double cond_target = target_censored / (1.0 - target_unsuitable);
  // P(V <= 0.5) is decreasing in delta0; negate for a monotone solve.
  const double delta0 = solve_monotone(-cond_target, [&](double c) {
    return -normal_expectation(c, sd_mu, [&](double s) {
      return beta_cdf(0.5, BetaMS(link_logit_inv(s), psi));
    });
  });
  return {gamma0, delta0};
}

std::pair<double, double> expected_zero_fractions(const ScenarioSpec& spec) {
  const double g0 = spec.truth.gamma[0];
  const double d0 = spec.truth.delta[0];
  const double slope_pi = spec.truth.gamma.size() > 1 ? spec.truth.gamma[1] : 0.0;
  const double slope_mu = spec.truth.delta.size() > 1 ? spec.truth.delta[1] : 0.0;
  const double sd_pi =
      std::sqrt(slope_pi * slope_pi + (spec.kind == ModelKind::M3 ? 1.0 : 0.0));
  const double sd_mu =
      std::sqrt(slope_mu * slope_mu + (spec.kind == ModelKind::M2 ? 1.0 : 0.0));
  const double e_pi =
      normal_expectation(g0, sd_pi, [](double s) { return link_logit_inv(s); });
  const double e_c = normal_expectation(d0, sd_mu, [&](double s) {
    return beta_cdf(0.5, BetaMS(link_logit_inv(s), spec.truth.psi));
  });
  return {e_pi, (1.0 - e_pi) * e_c};
}

std::vector<ScenarioSpec> scenario_grid(const std::string& family) {
  const auto targets = grid_targets(family);
  ModelKind kind = ModelKind::M1;
  double slope_pi = 0.75, slope_mu = -0.5, psi = 1.5, phi = 0.0;
  if (family == "m2" || family == "m3") {
    kind = family == "m2" ? ModelKind::M2 : ModelKind::M3;
    slope_mu = -1.0;
    psi = 2.0;
    phi = 20.0;
  }
  std::vector<ScenarioSpec> out;
  for (size_t k = 0; k < targets.size(); ++k) {
    const auto [g0, d0] =
        calibrate_intercepts(targets[k].first, targets[k].second, slope_pi, slope_mu, psi,
                             kind == ModelKind::M3, kind == ModelKind::M2);
    ScenarioSpec s = make_scenario(family + "-cell" + std::to_string(k + 1), kind, g0, slope_pi,
                                   d0, slope_mu, psi, phi);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace zib
