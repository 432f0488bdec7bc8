#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "zib/betadist.hpp"
#include "zib/common.hpp"

namespace zib {

enum class ModelKind { M0, M1, M2, M3, BEZI };

bool is_spatial(ModelKind k);
std::string model_name(ModelKind k);
ModelKind model_from_name(const std::string& name);

/// Observed data: responses in [0,1), a zero-inflation design X and a
/// Beta-mean design G (both with a leading all-ones intercept column),
/// and optional planar coordinates.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::MatrixXd G;
  std::optional<Eigen::MatrixXd> coords;  // n x 2

  int n() const { return static_cast<int>(y.size()); }
  void validate() const;
};

struct ParamState {
  Eigen::VectorXd gamma;
  Eigen::VectorXd delta;
  double psi = 1.0;
  std::optional<Eigen::VectorXd> effects;
  std::optional<double> phi;
};

/// Latent zero-source indicators Z and Beta draws V. For y_i > 0,
/// z_i = 0 and v_i = (y_i+1)/2. For z_i = 1 the v slot holds a
/// placeholder (0.25) that never enters the likelihood.
struct LatentState {
  std::vector<int> z;
  Eigen::VectorXd v;

  static LatentState init(const Dataset& data);
  void check(const Dataset& data) const;
};

struct NormalPrior {
  double mean = 0.0;
  double sd = 100.0;
  double log_density(double x) const;
};

struct PriorSpec {
  std::vector<NormalPrior> gamma;
  std::vector<NormalPrior> delta;
  NormalPrior log_psi{0.0, 10.0};
  double phi_lo = 0.0;
  double phi_hi = 0.0;

  static PriorSpec diffuse(int p_x, int p_g);
};

/// pi_i and mu_i for each observation under the given model kind.
/// For M0, pi is identically 0. Spatial effects enter mu (M2) or pi (M3).
std::pair<Eigen::VectorXd, Eigen::VectorXd> linear_predictors(const Dataset& data,
                                                              const ParamState& theta,
                                                              ModelKind kind);

/// Marginal probability that Y = 0 at a site.
double prob_zero(double pi, const BetaMS& p, ModelKind kind);

/// P(Z = 1 | Y = 0) = pi / (pi + (1-pi) P(V <= 0.5)).
double cond_z_one_prob(double pi, const BetaMS& p);

/// Complete-data log likelihood given the latent state.
double complete_loglik(const Dataset& data, const LatentState& lat, const ParamState& theta,
                       ModelKind kind);

/// Marginal log likelihood of a single observation.
double marginal_loglik_obs(double y, double pi, const BetaMS& p, ModelKind kind);

double log_prior(const ParamState& theta, const PriorSpec& priors);

}  // namespace zib
