#include "zib/model.hpp"

#include <cmath>
#include <limits>

namespace zib {

bool is_spatial(ModelKind k) { return k == ModelKind::M2 || k == ModelKind::M3; }

std::string model_name(ModelKind k) {
  switch (k) {
    case ModelKind::M0: return "m0";
    case ModelKind::M1: return "m1";
    case ModelKind::M2: return "m2";
    case ModelKind::M3: return "m3";
    case ModelKind::BEZI: return "bezi";
  }
  return "?";
}

ModelKind model_from_name(const std::string& name) {
  if (name == "m0") return ModelKind::M0;
  if (name == "m1") return ModelKind::M1;
  if (name == "m2") return ModelKind::M2;
  if (name == "m3") return ModelKind::M3;
  if (name == "bezi") return ModelKind::BEZI;
  throw UsageError("unknown model '" + name + "' (expected m0|m1|m2|m3|bezi)");
}

void Dataset::validate() const {
  const int nn = n();
  if (X.rows() != nn || G.rows() != nn)
    throw SpecificationError("Dataset: row counts of y, X, G must match");
  if (coords && coords->rows() != nn)
    throw SpecificationError("Dataset: coords row count must match y");
  if (coords && coords->cols() != 2)
    throw SpecificationError("Dataset: coords must have two columns");
  for (int i = 0; i < nn; ++i) {
    if (!(y[i] >= 0.0 && y[i] < 1.0))
      throw IngestionError("Dataset: y must lie in [0,1); offending row " + std::to_string(i));
  }
  if (!X.allFinite() || !G.allFinite())
    throw IngestionError("Dataset: non-finite covariate entries");
  if (coords && !coords->allFinite())
    throw IngestionError("Dataset: non-finite coordinates");
}

LatentState LatentState::init(const Dataset& data) {
  const int n = data.n();
  LatentState lat;
  lat.z.assign(n, 0);
  lat.v.resize(n);
  for (int i = 0; i < n; ++i) {
    lat.v[i] = data.y[i] > 0.0 ? (data.y[i] + 1.0) / 2.0 : 0.25;
  }
  return lat;
}

void LatentState::check(const Dataset& data) const {
  const int n = data.n();
  if (static_cast<int>(z.size()) != n || v.size() != n)
    throw SpecificationError("LatentState: size mismatch with dataset");
  for (int i = 0; i < n; ++i) {
    if (data.y[i] > 0.0) {
      if (z[i] != 0) throw SpecificationError("LatentState: z must be 0 for positive y");
      if (std::fabs(v[i] - (data.y[i] + 1.0) / 2.0) > 1e-12)
        throw SpecificationError("LatentState: v must equal (y+1)/2 for positive y");
    } else if (z[i] == 0) {
      if (!(v[i] > 0.0 && v[i] <= 0.5))
        throw SpecificationError("LatentState: censored v must lie in (0, 0.5]");
    }
  }
}

double NormalPrior::log_density(double x) const {
  const double r = (x - mean) / sd;
  return -0.5 * r * r - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
}

PriorSpec PriorSpec::diffuse(int p_x, int p_g) {
  PriorSpec pr;
  pr.gamma.assign(p_x, NormalPrior{});
  pr.delta.assign(p_g, NormalPrior{});
  return pr;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> linear_predictors(const Dataset& data,
                                                              const ParamState& theta,
                                                              ModelKind kind) {
  const int n = data.n();
  if (kind != ModelKind::M0 && theta.gamma.size() != data.X.cols())
    throw SpecificationError("linear_predictors: gamma length mismatch");
  if (theta.delta.size() != data.G.cols())
    throw SpecificationError("linear_predictors: delta length mismatch");
  if (is_spatial(kind)) {
    if (!theta.effects || theta.effects->size() != n)
      throw SpecificationError("linear_predictors: spatial model requires effects of length n");
  }

  Eigen::VectorXd pi(n), mu(n);
  Eigen::VectorXd eta_mu = data.G * theta.delta;
  if (kind == ModelKind::M2) eta_mu += *theta.effects;

  if (kind == ModelKind::M0) {
    pi.setZero();
  } else {
    Eigen::VectorXd eta_pi = data.X * theta.gamma;
    if (kind == ModelKind::M3) eta_pi += *theta.effects;
    for (int i = 0; i < n; ++i) pi[i] = link_logit_inv(eta_pi[i]);
  }
  for (int i = 0; i < n; ++i) mu[i] = link_logit_inv(eta_mu[i]);
  return {pi, mu};
}

double prob_zero(double pi, const BetaMS& p, ModelKind kind) {
  if (kind == ModelKind::BEZI) return pi;
  const double c = beta_cdf(0.5, p);
  if (kind == ModelKind::M0) return c;
  return pi + (1.0 - pi) * c;
}

double cond_z_one_prob(double pi, const BetaMS& p) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw DomainError("cond_z_one_prob: pi must lie in [0,1]");
  if (pi == 0.0) return 0.0;
  if (pi == 1.0) return 1.0;
  const double denom = pi + (1.0 - pi) * beta_cdf(0.5, p);
  if (denom < 1e-300) throw DomainError("cond_z_one_prob: degenerate conditional (denominator underflow)");
  return pi / denom;
}

double complete_loglik(const Dataset& data, const LatentState& lat, const ParamState& theta,
                       ModelKind kind) {
  lat.check(data);
  auto [pi, mu] = linear_predictors(data, theta, kind);
  const int n = data.n();
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    const BetaMS p(mu[i], theta.psi);
    if (kind == ModelKind::BEZI) {
      if (data.y[i] > 0.0)
        ll += std::log1p(-pi[i]) + beta_log_density(data.y[i], p);
      else
        ll += std::log(pi[i]);
      continue;
    }
    if (data.y[i] > 0.0) {
      double term = extended_beta_log_density(data.y[i], p);
      if (kind != ModelKind::M0) term += std::log1p(-pi[i]);
      ll += term;
    } else if (lat.z[i] == 1) {
      ll += std::log(pi[i]);
    } else {
      double term = beta_log_density(lat.v[i], p);
      if (kind != ModelKind::M0) term += std::log1p(-pi[i]);
      ll += term;
    }
  }
  return ll;
}

double marginal_loglik_obs(double y, double pi, const BetaMS& p, ModelKind kind) {
  if (!(y >= 0.0 && y < 1.0)) throw DomainError("marginal_loglik_obs: y must lie in [0,1)");
  if (y == 0.0) return std::log(prob_zero(pi, p, kind));
  if (kind == ModelKind::BEZI) return std::log1p(-pi) + beta_log_density(y, p);
  double term = extended_beta_log_density(y, p);
  if (kind != ModelKind::M0) term += std::log1p(-pi);
  return term;
}

double log_prior(const ParamState& theta, const PriorSpec& priors) {
  double lp = 0.0;
  for (int j = 0; j < theta.gamma.size(); ++j)
    lp += priors.gamma.at(j).log_density(theta.gamma[j]);
  for (int j = 0; j < theta.delta.size(); ++j)
    lp += priors.delta.at(j).log_density(theta.delta[j]);
  lp += priors.log_psi.log_density(std::log(theta.psi));
  if (theta.phi) {
    if (*theta.phi < priors.phi_lo || *theta.phi > priors.phi_hi)
      return -std::numeric_limits<double>::infinity();
    // Uniform within bounds: constant contribution.
  }
  return lp;
}

}  // namespace zib
