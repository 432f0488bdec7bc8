#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zib/model.hpp"
#include "zib/spatial.hpp"

namespace zib {

struct SamplerConfig {
  int iterations = 7500;
  int burn_in = 2500;
  int thin = 5;
  std::uint64_t seed = 1;
  double scale_gamma = 0.1;
  double scale_delta = 0.1;
  double scale_log_psi = 0.2;
  double scale_log_phi = 0.3;
  int adapt_window = 100;
  double target_accept = 0.3;
  // Elliptical slice repetitions per sweep; the latent field mixes far
  // slower than the scalar blocks, and its proposals follow the current
  // decay, so a single update per sweep can trap the chain in an
  // over-smooth mode.
  int ess_repeats = 10;

  void validate() const;
  int n_kept() const { return (iterations - burn_in) / thin; }
};

struct ChainOutput {
  ModelKind kind = ModelKind::M1;
  SamplerConfig config;
  std::vector<std::string> names;
  Eigen::MatrixXd samples;        // kept sweeps x named parameters
  std::vector<int> zero_indices;  // observation indices with y == 0
  Eigen::MatrixXi z_draws;        // kept sweeps x zero_indices.size()
  std::map<std::string, double> accept_rate;
  std::map<std::string, double> final_scale;

  int n_kept() const { return static_cast<int>(samples.rows()); }
  int col(const std::string& name) const;
  Eigen::VectorXd column(const std::string& name) const;
  bool has(const std::string& name) const;
};

struct PosteriorSummary {
  std::vector<std::string> names;
  Eigen::VectorXd mean;
  Eigen::VectorXd q025;
  Eigen::VectorXd q975;
};

struct MetropolisResult {
  Eigen::VectorXd value;
  double logpost;
  bool accepted;
};

/// Gaussian random-walk Metropolis update of a whole block. `current_lp`
/// lets callers reuse the log posterior at the current point.
MetropolisResult metropolis_block(Rng& rng, const Eigen::VectorXd& current, double scale,
                                  const std::function<double(const Eigen::VectorXd&)>& logpost,
                                  std::optional<double> current_lp = std::nullopt);

/// One elliptical slice update of a latent Gaussian vector with prior
/// factor F; invariant distribution is prior(effects) * exp(loglik).
struct EssResult {
  Eigen::VectorXd effects;
  double loglik;
};
EssResult elliptical_slice(Rng& rng, const Eigen::VectorXd& effects, const GPFactor& F,
                           const std::function<double(const Eigen::VectorXd&)>& loglik,
                           std::optional<double> current_ll = std::nullopt);

/// Log-scale random-walk Metropolis on phi with a uniform prior on
/// (bounds.first, bounds.second); proposals outside the bounds are rejected.
std::pair<double, bool> update_phi(Rng& rng, double phi, std::pair<double, double> bounds,
                                   double scale,
                                   const std::function<double(double)>& loglik_phi);

/// Resample Z (and truncated V when Z = 0) for every zero observation.
LatentState update_latents(Rng& rng, const Dataset& data, const ParamState& theta,
                           ModelKind kind, const LatentState& lat);

ChainOutput run_chain(const Dataset& data, ModelKind kind, const PriorSpec& priors,
                      const SamplerConfig& config);

/// k independent chains with derived seeds, run on up to `jobs` threads.
std::vector<ChainOutput> run_chains(const Dataset& data, ModelKind kind, const PriorSpec& priors,
                                    const SamplerConfig& config, int k, int jobs);

PosteriorSummary summarize(const ChainOutput& chain);

/// Linear-interpolation (type 7) empirical quantile.
double quantile(Eigen::VectorXd values, double p);

/// Default data-driven uniform bounds for phi.
std::pair<double, double> default_phi_bounds(const Eigen::MatrixXd& coords);

}  // namespace zib
