#pragma once

#include <string>
#include <vector>

#include "zib/model.hpp"

namespace zib {

/// Ground-truth configuration for one simulated scenario. Non-intercept
/// covariates are independent standard normals; locations (spatial kinds)
/// are uniform on an axis-aligned square.
struct ScenarioSpec {
  std::string name;
  ModelKind kind = ModelKind::M1;
  ParamState truth;  // gamma, delta, psi (+ phi for spatial kinds)
  int n_train = 400;
  int n_test = 200;
  double region = 50.0;  // square side length
};

struct LabeledDataset {
  Dataset data;
  // 0 = positive, 1 = zero from unsuitability, 2 = zero from censoring.
  std::vector<int> label;
  Eigen::VectorXd w_true;  // latent W; NaN for unsuitability zeros
  std::optional<Eigen::VectorXd> effects_true;
};

std::pair<LabeledDataset, LabeledDataset> generate(const ScenarioSpec& spec, Rng& rng);

/// The paper-style named scenarios: sim1.1-sim1.3 (nonspatial),
/// sim2.1-sim2.3 (effect in the mean), sim3.1-sim3.3 (effect in the
/// zero probability).
ScenarioSpec named_scenario(const std::string& name);

/// Nine-cell grids of zero mixes (small/medium/large totals, balanced
/// and unbalanced sources); family is "table2" (nonspatial), "m2" or "m3".
/// Intercepts are calibrated numerically to hit the target mixes.
std::vector<ScenarioSpec> scenario_grid(const std::string& family);

/// Target (unsuitable, censored) zero fractions for each grid cell.
std::vector<std::pair<double, double>> grid_targets(const std::string& family);

/// Solve for (gamma0, delta0) so that the expected unsuitable-zero and
/// censored-zero fractions hit the targets, integrating the covariate
/// (and unit-variance effect) laws by quadrature.
std::pair<double, double> calibrate_intercepts(double target_unsuitable, double target_censored,
                                               double slope_pi, double slope_mu, double psi,
                                               bool effect_in_pi, bool effect_in_mu);

/// Analytic expected (unsuitable, censored) zero fractions for a scenario.
std::pair<double, double> expected_zero_fractions(const ScenarioSpec& spec);

}  // namespace zib
