#pragma once

#include <Eigen/Dense>

#include "zib/common.hpp"

namespace zib {

/// Lower-triangular factor of C + jitter*I.
struct GPFactor {
  Eigen::MatrixXd L;
  double jitter = 0.0;
};

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& coords);

/// Unit-variance exponential covariance: C_ij = exp(-phi * D_ij).
Eigen::MatrixXd exp_covariance(const Eigen::MatrixXd& D, double phi);

/// Cholesky with a jitter ladder {0, 1e-10, 1e-8, 1e-6, 1e-4}.
GPFactor chol_jitter(const Eigen::MatrixXd& C);

Eigen::VectorXd gp_prior_draw(Rng& rng, const GPFactor& F);

/// Gaussian conditional of test effects given training effects.
struct GPConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
GPConditional gp_conditional(const Eigen::MatrixXd& train_coords,
                             const Eigen::VectorXd& train_effects,
                             const Eigen::MatrixXd& test_coords, double phi);

/// Distance at which exponential correlation drops to ~0.05: 3/phi.
double effective_range(double phi);

}  // namespace zib
