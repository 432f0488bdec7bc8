#pragma once

#include "zib/common.hpp"

namespace zib {

/// Beta distribution in the mean / sample-size parametrization:
/// shapes are alpha = mu*psi, beta = (1-mu)*psi.
struct BetaMS {
  double mu;
  double psi;

  BetaMS(double mu_, double psi_) : mu(mu_), psi(psi_) {
    if (!(mu > 0.0 && mu < 1.0) || !(psi > 0.0))
      throw DomainError("BetaMS: require 0 < mu < 1 and psi > 0");
  }

  double alpha() const { return mu * psi; }
  double beta() const { return (1.0 - mu) * psi; }
};

/// A latent extended-Beta value: w = 2v - 1 with v the underlying Beta draw.
struct ExtendedBetaValue {
  double w;
  double v;
  static ExtendedBetaValue from_v(double v) { return {2.0 * v - 1.0, v}; }
};

/// (mu, psi) -> (alpha, beta)
std::pair<double, double> reparam(double mu, double psi);
/// (alpha, beta) -> (mu, psi)
std::pair<double, double> reparam_inverse(double alpha, double beta);

double lbeta(double a, double b);

/// Regularized incomplete beta I_x(a, b) via continued fraction.
double reg_inc_beta(double x, double a, double b);
/// Variant taking a precomputed lbeta(a, b), for hot loops.
double reg_inc_beta(double x, double a, double b, double lbeta_ab);

/// log f(v | mu, psi) of the Beta density on (0,1).
double beta_log_density(double v, const BetaMS& p);
/// CDF of the Beta on (0,1); clamped endpoints allowed.
double beta_cdf(double v, const BetaMS& p);
/// Inverse CDF, bisection + Newton polish to 1e-12 CDF tolerance.
double beta_inv_cdf(double u, const BetaMS& p);

/// Density/CDF of W = 2V - 1 on (-1,1).
double extended_beta_log_density(double w, const BetaMS& p);
double extended_beta_cdf(double w, const BetaMS& p);

double sample_beta(Rng& rng, const BetaMS& p);
/// Draw from the Beta renormalized to (lo,hi) by inverse CDF.
double sample_beta_truncated(Rng& rng, const BetaMS& p, double lo, double hi);

/// Inverse links, clipped for numerical safety in downstream likelihoods.
double link_logit_inv(double x);
double link_log_inv(double x);
double logit(double p);

}  // namespace zib
