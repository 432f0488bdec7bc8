#include "zib/mcmc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace zib {

namespace {

// Continuous-part log likelihood given latents, as a function of mu and psi.
// Positives contribute the extended-Beta density at y (Beta on (0,1) at y for
// the hurdle model); censored zeros contribute the Beta density at their
// latent v; degenerate zeros contribute nothing.
double beta_part_loglik(const Dataset& data, const LatentState& lat,
                        const Eigen::VectorXd& mu, double psi, ModelKind kind) {
  const int n = data.n();
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    if (data.y[i] > 0.0) {
      const BetaMS p(mu[i], psi);
      ll += kind == ModelKind::BEZI ? beta_log_density(data.y[i], p)
                                    : extended_beta_log_density(data.y[i], p);
    } else if (kind != ModelKind::BEZI && lat.z[i] == 0) {
      ll += beta_log_density(lat.v[i], BetaMS(mu[i], psi));
    }
  }
  return ll;
}

// Bernoulli log likelihood of the latent indicators as a function of pi.
double zero_part_loglik(const LatentState& lat, const Eigen::VectorXd& pi) {
  double ll = 0.0;
  for (int i = 0; i < static_cast<int>(lat.z.size()); ++i) {
    ll += lat.z[i] == 1 ? std::log(pi[i]) : std::log1p(-pi[i]);
  }
  return ll;
}

double normal_block_log_prior(const Eigen::VectorXd& x, const std::vector<NormalPrior>& pr) {
  double lp = 0.0;
  for (int j = 0; j < x.size(); ++j) lp += pr.at(j).log_density(x[j]);
  return lp;
}

// Log density of effects under N(0, L L^T), dropping the 2*pi constant.
double gp_log_density(const Eigen::VectorXd& effects, const GPFactor& F) {
  const Eigen::VectorXd z = F.L.triangularView<Eigen::Lower>().solve(effects);
  double logdet = 0.0;
  for (int i = 0; i < F.L.rows(); ++i) logdet += std::log(F.L(i, i));
  return -logdet - 0.5 * z.squaredNorm();
}

struct BlockTuner {
  double log_scale;
  int accepts = 0;
  int proposals = 0;
  int window_accepts = 0;
  int window_proposals = 0;
  int windows_done = 0;

  explicit BlockTuner(double scale) : log_scale(std::log(scale)) {}
  double scale() const { return std::exp(log_scale); }

  void record(bool accepted) {
    ++proposals;
    ++window_proposals;
    if (accepted) {
      ++accepts;
      ++window_accepts;
    }
  }

  void adapt(int window, double target) {
    if (window_proposals < window) return;
    const double rate = static_cast<double>(window_accepts) / window_proposals;
    ++windows_done;
    const double step = 1.0 / std::sqrt(static_cast<double>(windows_done));
    log_scale = std::clamp(log_scale + step * (rate - target), std::log(1e-5), std::log(10.0));
    window_accepts = 0;
    window_proposals = 0;
  }

  double rate() const {
    return proposals > 0 ? static_cast<double>(accepts) / proposals : 0.0;
  }
};

}  // namespace

void SamplerConfig::validate() const {
  if (burn_in < 0 || burn_in >= iterations)
    throw SpecificationError("SamplerConfig: require 0 <= burn_in < iterations");
  if (thin < 1) throw SpecificationError("SamplerConfig: thin must be >= 1");
  if (scale_gamma <= 0 || scale_delta <= 0 || scale_log_psi <= 0 || scale_log_phi <= 0)
    throw SpecificationError("SamplerConfig: proposal scales must be positive");
  if ((iterations - burn_in) / thin < 1)
    throw SpecificationError("SamplerConfig: no retained samples under these settings");
  if (ess_repeats < 1) throw SpecificationError("SamplerConfig: ess_repeats must be >= 1");
}

int ChainOutput::col(const std::string& name) const {
  for (size_t j = 0; j < names.size(); ++j)
    if (names[j] == name) return static_cast<int>(j);
  throw SpecificationError("ChainOutput: no column named '" + name + "'");
}

Eigen::VectorXd ChainOutput::column(const std::string& name) const {
  return samples.col(col(name));
}

bool ChainOutput::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

MetropolisResult metropolis_block(Rng& rng, const Eigen::VectorXd& current, double scale,
                                  const std::function<double(const Eigen::VectorXd&)>& logpost,
                                  std::optional<double> current_lp) {
  const double lp0 = current_lp ? *current_lp : logpost(current);
  if (!std::isfinite(lp0))
    throw SamplerStateError("metropolis_block: non-finite log posterior at current state");
  Eigen::VectorXd prop = current;
  for (int j = 0; j < prop.size(); ++j) prop[j] += scale * rng.normal();
  const double lp1 = logpost(prop);
  if (std::isnan(lp1)) throw SamplerStateError("metropolis_block: log posterior returned NaN");
  if (std::log(rng.uniform()) < lp1 - lp0) return {prop, lp1, true};
  return {current, lp0, false};
}

EssResult elliptical_slice(Rng& rng, const Eigen::VectorXd& effects, const GPFactor& F,
                           const std::function<double(const Eigen::VectorXd&)>& loglik,
                           std::optional<double> current_ll) {
  const double ll0 = current_ll ? *current_ll : loglik(effects);
  if (std::isnan(ll0)) throw SamplerStateError("elliptical_slice: NaN log likelihood");
  Eigen::VectorXd nu = gp_prior_draw(rng, F);
  const double log_y = ll0 + std::log(rng.uniform());

  double theta = rng.uniform(0.0, 2.0 * M_PI);
  double lo = theta - 2.0 * M_PI;
  double hi = theta;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd prop = effects * std::cos(theta) + nu * std::sin(theta);
    const double ll = loglik(prop);
    if (std::isnan(ll)) throw SamplerStateError("elliptical_slice: NaN log likelihood");
    if (ll > log_y) return {std::move(prop), ll};
    // Shrink the bracket toward the current state.
    if (theta < 0.0)
      lo = theta;
    else
      hi = theta;
    theta = rng.uniform(lo, hi);
  }
  throw SamplerStateError("elliptical_slice: bracket failed to close");
}

std::pair<double, bool> update_phi(Rng& rng, double phi, std::pair<double, double> bounds,
                                   double scale,
                                   const std::function<double(double)>& loglik_phi) {
  const double prop = phi * std::exp(scale * rng.normal());
  if (prop < bounds.first || prop > bounds.second) return {phi, false};
  // Uniform prior on phi with a log-scale walk: include the Jacobian.
  const double lp0 = loglik_phi(phi);
  const double lp1 = loglik_phi(prop);
  if (std::isnan(lp1)) throw SamplerStateError("update_phi: NaN log likelihood");
  const double log_ratio = lp1 - lp0 + std::log(prop) - std::log(phi);
  if (std::log(rng.uniform()) < log_ratio) return {prop, true};
  return {phi, false};
}

LatentState update_latents(Rng& rng, const Dataset& data, const ParamState& theta,
                           ModelKind kind, const LatentState& lat) {
  LatentState out = lat;
  if (kind == ModelKind::BEZI) return out;  // no latent augmentation
  auto [pi, mu] = linear_predictors(data, theta, kind);
  for (int i = 0; i < data.n(); ++i) {
    if (data.y[i] > 0.0) continue;
    const BetaMS p(mu[i], theta.psi);
    if (kind == ModelKind::M0) {
      out.z[i] = 0;
    } else {
      const double pz = cond_z_one_prob(pi[i], p);
      out.z[i] = rng.uniform() < pz ? 1 : 0;
    }
    if (out.z[i] == 0) {
      out.v[i] = sample_beta_truncated(rng, p, 0.0, 0.5);
    } else {
      out.v[i] = 0.25;  // placeholder, never enters the likelihood
    }
  }
  return out;
}

ChainOutput run_chain(const Dataset& data, ModelKind kind, const PriorSpec& priors,
                      const SamplerConfig& config) {
  data.validate();
  config.validate();
  const int n = data.n();
  const int px = static_cast<int>(data.X.cols());
  const int pg = static_cast<int>(data.G.cols());
  const bool spatial = is_spatial(kind);
  const bool has_gamma = kind != ModelKind::M0;
  if (spatial && !data.coords)
    throw SpecificationError("run_chain: spatial model requires coordinates");
  if (has_gamma && static_cast<int>(priors.gamma.size()) != px)
    throw SpecificationError("run_chain: gamma prior length mismatch");
  if (static_cast<int>(priors.delta.size()) != pg)
    throw SpecificationError("run_chain: delta prior length mismatch");
  if (spatial && !(priors.phi_lo > 0.0 && priors.phi_lo < priors.phi_hi))
    throw SpecificationError("run_chain: invalid phi bounds");

  Rng rng(config.seed);

  // State initialisation: coefficients at their prior means.
  ParamState theta;
  theta.gamma.resize(px);
  for (int j = 0; j < px; ++j) theta.gamma[j] = has_gamma ? priors.gamma[j].mean : 0.0;
  theta.delta.resize(pg);
  for (int j = 0; j < pg; ++j) theta.delta[j] = priors.delta[j].mean;
  theta.psi = 1.0;
  std::optional<Eigen::MatrixXd> D;
  GPFactor factor;
  if (spatial) {
    theta.effects = Eigen::VectorXd::Zero(n);
    theta.phi = std::sqrt(priors.phi_lo * priors.phi_hi);
    D = distance_matrix(*data.coords);
    factor = chol_jitter(exp_covariance(*D, *theta.phi));
  }

  LatentState lat = LatentState::init(data);
  if (kind == ModelKind::BEZI) {
    for (int i = 0; i < n; ++i) lat.z[i] = data.y[i] == 0.0 ? 1 : 0;
  }

  // Column layout.
  ChainOutput out;
  out.kind = kind;
  out.config = config;
  if (has_gamma)
    for (int j = 0; j < px; ++j) out.names.push_back("gamma_" + std::to_string(j));
  for (int j = 0; j < pg; ++j) out.names.push_back("delta_" + std::to_string(j));
  out.names.push_back("log_psi");
  if (spatial) {
    out.names.push_back("phi");
    for (int i = 0; i < n; ++i) out.names.push_back("eff_" + std::to_string(i));
  }
  for (int i = 0; i < n; ++i)
    if (data.y[i] == 0.0) out.zero_indices.push_back(i);
  const int kept = config.n_kept();
  out.samples.resize(kept, static_cast<int>(out.names.size()));
  out.z_draws.resize(kept, static_cast<int>(out.zero_indices.size()));

  BlockTuner tune_gamma(config.scale_gamma);
  BlockTuner tune_delta(config.scale_delta);
  BlockTuner tune_psi(config.scale_log_psi);
  BlockTuner tune_phi(config.scale_log_phi);

  auto pi_of_gamma = [&](const Eigen::VectorXd& g) {
    Eigen::VectorXd eta = data.X * g;
    if (kind == ModelKind::M3) eta += *theta.effects;
    Eigen::VectorXd pi(n);
    for (int i = 0; i < n; ++i) pi[i] = link_logit_inv(eta[i]);
    return pi;
  };
  auto mu_of_delta = [&](const Eigen::VectorXd& d) {
    Eigen::VectorXd eta = data.G * d;
    if (kind == ModelKind::M2) eta += *theta.effects;
    Eigen::VectorXd mu(n);
    for (int i = 0; i < n; ++i) mu[i] = link_logit_inv(eta[i]);
    return mu;
  };

  int kept_row = 0;
  for (int t = 1; t <= config.iterations; ++t) {
    const bool adapting = t <= config.burn_in;

    lat = update_latents(rng, data, theta, kind, lat);

    if (has_gamma) {
      auto logpost = [&](const Eigen::VectorXd& g) {
        return zero_part_loglik(lat, pi_of_gamma(g)) + normal_block_log_prior(g, priors.gamma);
      };
      auto res = metropolis_block(rng, theta.gamma, tune_gamma.scale(), logpost);
      theta.gamma = res.value;
      tune_gamma.record(res.accepted);
      if (adapting) tune_gamma.adapt(config.adapt_window, config.target_accept);
    }

    {
      auto logpost = [&](const Eigen::VectorXd& d) {
        return beta_part_loglik(data, lat, mu_of_delta(d), theta.psi, kind) +
               normal_block_log_prior(d, priors.delta);
      };
      auto res = metropolis_block(rng, theta.delta, tune_delta.scale(), logpost);
      theta.delta = res.value;
      tune_delta.record(res.accepted);
      if (adapting) tune_delta.adapt(config.adapt_window, config.target_accept);
    }

    {
      const Eigen::VectorXd mu = mu_of_delta(theta.delta);
      auto logpost = [&](const Eigen::VectorXd& s) {
        return beta_part_loglik(data, lat, mu, std::exp(s[0]), kind) +
               priors.log_psi.log_density(s[0]);
      };
      Eigen::VectorXd cur(1);
      cur[0] = std::log(theta.psi);
      auto res = metropolis_block(rng, cur, tune_psi.scale(), logpost);
      theta.psi = std::exp(res.value[0]);
      tune_psi.record(res.accepted);
      if (adapting) tune_psi.adapt(config.adapt_window, config.target_accept);
    }

    if (spatial) {
      // Effects via elliptical slice against the conditional likelihood.
      auto loglik = [&](const Eigen::VectorXd& eff) {
        if (kind == ModelKind::M2) {
          Eigen::VectorXd eta = data.G * theta.delta + eff;
          Eigen::VectorXd mu(n);
          for (int i = 0; i < n; ++i) mu[i] = link_logit_inv(eta[i]);
          return beta_part_loglik(data, lat, mu, theta.psi, kind);
        }
        Eigen::VectorXd eta = data.X * theta.gamma + eff;
        Eigen::VectorXd pi(n);
        for (int i = 0; i < n; ++i) pi[i] = link_logit_inv(eta[i]);
        return zero_part_loglik(lat, pi);
      };
      std::optional<double> cur_ll;
      for (int rep = 0; rep < config.ess_repeats; ++rep) {
        auto ess = elliptical_slice(rng, *theta.effects, factor, loglik, cur_ll);
        theta.effects = ess.effects;
        cur_ll = ess.loglik;
      }

      auto loglik_phi = [&](double ph) {
        const GPFactor f = ph == *theta.phi ? factor : chol_jitter(exp_covariance(*D, ph));
        return gp_log_density(*theta.effects, f);
      };
      auto [phi_new, accepted] =
          update_phi(rng, *theta.phi, {priors.phi_lo, priors.phi_hi}, tune_phi.scale(),
                     loglik_phi);
      if (accepted) {
        theta.phi = phi_new;
        factor = chol_jitter(exp_covariance(*D, phi_new));
      }
      tune_phi.record(accepted);
      if (adapting) tune_phi.adapt(config.adapt_window, config.target_accept);
    }

    if (t > config.burn_in && (t - config.burn_in) % config.thin == 0 && kept_row < kept) {
      int c = 0;
      if (has_gamma)
        for (int j = 0; j < px; ++j) out.samples(kept_row, c++) = theta.gamma[j];
      for (int j = 0; j < pg; ++j) out.samples(kept_row, c++) = theta.delta[j];
      out.samples(kept_row, c++) = std::log(theta.psi);
      if (spatial) {
        out.samples(kept_row, c++) = *theta.phi;
        for (int i = 0; i < n; ++i) out.samples(kept_row, c++) = (*theta.effects)[i];
      }
      for (size_t j = 0; j < out.zero_indices.size(); ++j)
        out.z_draws(kept_row, static_cast<int>(j)) = lat.z[out.zero_indices[j]];
      ++kept_row;
    }
  }

  if (has_gamma) {
    out.accept_rate["gamma"] = tune_gamma.rate();
    out.final_scale["gamma"] = tune_gamma.scale();
  }
  out.accept_rate["delta"] = tune_delta.rate();
  out.final_scale["delta"] = tune_delta.scale();
  out.accept_rate["log_psi"] = tune_psi.rate();
  out.final_scale["log_psi"] = tune_psi.scale();
  if (spatial) {
    out.accept_rate["phi"] = tune_phi.rate();
    out.final_scale["phi"] = tune_phi.scale();
  }
  return out;
}

std::vector<ChainOutput> run_chains(const Dataset& data, ModelKind kind, const PriorSpec& priors,
                                    const SamplerConfig& config, int k, int jobs) {
  if (k < 1) throw SpecificationError("run_chains: k must be >= 1");
  std::vector<ChainOutput> outs(k);
  std::vector<std::exception_ptr> errors(k);
  jobs = std::max(1, std::min(jobs, k));
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= k) return;
      try {
        SamplerConfig c = config;
        c.seed = config.seed + 1000003ULL * static_cast<std::uint64_t>(i);
        outs[i] = run_chain(data, kind, priors, c);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return outs;
}

double quantile(Eigen::VectorXd values, double p) {
  std::sort(values.data(), values.data() + values.size());
  const int n = static_cast<int>(values.size());
  if (n == 1) return values[0];
  const double h = (n - 1) * p;
  const int lo = static_cast<int>(std::floor(h));
  const int hi = std::min(lo + 1, n - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

PosteriorSummary summarize(const ChainOutput& chain) {
  if (chain.n_kept() < 2)
    throw MetricError("summarize: need at least 2 retained samples");
  const int p = static_cast<int>(chain.names.size());
  PosteriorSummary s;
  s.names = chain.names;
  s.mean.resize(p);
  s.q025.resize(p);
  s.q975.resize(p);
  for (int j = 0; j < p; ++j) {
    s.mean[j] = chain.samples.col(j).mean();
    s.q025[j] = quantile(chain.samples.col(j), 0.025);
    s.q975[j] = quantile(chain.samples.col(j), 0.975);
  }
  return s;
}

std::pair<double, double> default_phi_bounds(const Eigen::MatrixXd& coords) {
  const Eigen::MatrixXd D = distance_matrix(coords);
  const int n = static_cast<int>(coords.rows());
  double dmax = 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      dmax = std::max(dmax, D(i, j));
      if (D(i, j) > 0.0) dmin = std::min(dmin, D(i, j));
    }
  if (!(dmax > 0.0)) throw SpecificationError("default_phi_bounds: degenerate coordinates");
  if (!std::isfinite(dmin)) dmin = dmax;
  return {3.0 / dmax, 3.0 * n / dmin};
}

}  // namespace zib
