#include "zib/spatial.hpp"

#include <array>
#include <cmath>

namespace zib {

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& coords) {
  if (!coords.allFinite()) throw DomainError("distance_matrix: non-finite coordinates");
  const int n = static_cast<int>(coords.rows());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (coords.row(i) - coords.row(j)).norm();
      D(i, j) = d;
      D(j, i) = d;
    }
  }
  return D;
}

Eigen::MatrixXd exp_covariance(const Eigen::MatrixXd& D, double phi) {
  if (!(phi > 0.0)) throw DomainError("exp_covariance: phi must be positive");
  return (-phi * D.array()).exp().matrix();
}

GPFactor chol_jitter(const Eigen::MatrixXd& C) {
  static constexpr std::array<double, 5> ladder = {0.0, 1e-10, 1e-8, 1e-6, 1e-4};
  for (double j : ladder) {
    Eigen::MatrixXd Cj = C;
    if (j > 0.0) Cj.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(Cj);
    if (llt.info() == Eigen::Success) {
      return GPFactor{llt.matrixL(), j};
    }
  }
  throw DomainError("chol_jitter: covariance not positive definite at any jitter level");
}

Eigen::VectorXd gp_prior_draw(Rng& rng, const GPFactor& F) {
  const int n = static_cast<int>(F.L.rows());
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  return F.L.triangularView<Eigen::Lower>() * z;
}

GPConditional gp_conditional(const Eigen::MatrixXd& train_coords,
                             const Eigen::VectorXd& train_effects,
                             const Eigen::MatrixXd& test_coords, double phi) {
  const int n = static_cast<int>(train_coords.rows());
  const int m = static_cast<int>(test_coords.rows());
  if (train_effects.size() != n)
    throw SpecificationError("gp_conditional: effects length must match train coords");

  const Eigen::MatrixXd C = exp_covariance(distance_matrix(train_coords), phi);
  const GPFactor F = chol_jitter(C);

  Eigen::MatrixXd Cstar(n, m);  // train x test cross-covariance
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      Cstar(i, j) = std::exp(-phi * (train_coords.row(i) - test_coords.row(j)).norm());
  const Eigen::MatrixXd Ctest = exp_covariance(distance_matrix(test_coords), phi);

  // Solve via the factor: C^{-1} x = L^-T L^-1 x.
  auto solve = [&F](const Eigen::MatrixXd& B) {
    Eigen::MatrixXd out = F.L.triangularView<Eigen::Lower>().solve(B);
    return Eigen::MatrixXd(F.L.transpose().triangularView<Eigen::Upper>().solve(out));
  };

  GPConditional cond;
  cond.mean = Cstar.transpose() * solve(train_effects);
  cond.cov = Ctest - Cstar.transpose() * solve(Cstar);
  return cond;
}

double effective_range(double phi) {
  if (!(phi > 0.0)) throw DomainError("effective_range: phi must be positive");
  return 3.0 / phi;
}

}  // namespace zib
