#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "zib/mcmc.hpp"
#include "zib/model.hpp"

namespace zib {

/// One posterior sample's predictive parameters at a site, with
/// precomputed pieces for fast CDF evaluation.
struct PredComponent {
  double pi;
  double mu;
  double psi;
  double alpha;      // mu * psi
  double beta;       // (1 - mu) * psi
  double lbeta_ab;   // cached normalizer for CDF evaluation
  double f05;        // P(V <= 0.5) under this component
  double prob_zero;  // marginal zero probability under this component

  static PredComponent make(double pi, double mu, double psi, ModelKind kind);
};

/// Posterior predictive distribution of Y at one site: a point mass at
/// zero plus a continuous part on (0,1), averaged over posterior samples.
struct PredictiveDist {
  ModelKind kind = ModelKind::M1;
  double p0 = 0.0;
  std::vector<PredComponent> comps;
  std::vector<double> ensemble;  // draws in [0,1), zeros included

  /// Full mixed CDF at x in (0,1).
  double cdf(double x) const;
  /// CDF renormalized to the positive part.
  double positive_cdf(double x) const;
  /// Latent-scale CDF for x in (-1,0): mass of W at or below x.
  double latent_cdf(double x) const;
  /// Predictive mean E[Y].
  double mean() const;
  /// Posterior predictive conditional source probability P(Z=1 | Y=0).
  double source_prob() const;

  static PredictiveDist from_components(ModelKind kind, std::vector<PredComponent> comps,
                                        std::vector<double> ensemble);
};

struct McResult {
  double value = 0.0;
  double se = 0.0;
};

/// (b-a) * mean of f at uniform draws, with its standard error.
McResult mc_integrate(const std::function<double(double)>& f, double a, double b, int n_samples,
                      Rng& rng);

/// How to read the y = 0 branch of the mixed-distribution score.
enum class CrpsZeroBranch {
  bounded,  // integral of (1 - F)^2 over the bounded support (0,1)
  latent,   // integral of (1 - F_W)^2 over the latent scale (-1,0)
};

/// Mixed-distribution CRPS: y>0 branch p0^2 + integral of (F - 1(y<x))^2;
/// y=0 branch (1-p0)^2 plus the chosen reading of the tail integral.
McResult crps_full(const PredictiveDist& pred, double y, int n_mc, Rng& rng,
                   CrpsZeroBranch mode = CrpsZeroBranch::bounded);

/// Standard CRPS of the positive-part predictive; y must be positive.
McResult crps_hurdle(const PredictiveDist& pred, double y, int n_mc, Rng& rng);

/// Sample-based CRPS estimator: mean|X - y| - 0.5 mean|X - X'|.
double crps_sample_oracle(std::vector<double> ensemble, double y);

/// Coefficient of discrimination: mean fitted probability over successes
/// minus mean over failures.
double tjur_r2(const std::vector<double>& fitted_probs, const std::vector<int>& labels);

struct RocResult {
  std::vector<std::pair<double, double>> curve;  // (fpr, tpr)
  double auc = 0.0;
};
/// ROC by threshold sweep; AUC equals the Mann-Whitney statistic with
/// rank-averaged ties.
RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct PredictOptions {
  int max_samples = 0;  // 0 = use every retained sample
  int ensemble_per_sample = 1;
  std::uint64_t seed = 20240817;
};

/// Per-site posterior predictive mixtures from a fitted chain. Spatial
/// models require both the training and the new coordinates.
std::vector<PredictiveDist> predictive_at_sites(const ChainOutput& chain,
                                                const Eigen::MatrixXd& new_X,
                                                const Eigen::MatrixXd& new_G,
                                                const std::optional<Eigen::MatrixXd>& new_coords,
                                                const std::optional<Eigen::MatrixXd>& train_coords,
                                                const PredictOptions& opts = {});

struct ScoreOptions {
  int crps_mc_samples = 10000;
  std::uint64_t seed = 987654321;
};

struct ObsScore {
  double y = 0.0;
  double p0 = 0.0;
  double crps_f = 0.0;
  double crps_f_se = 0.0;
  double crps_f_latent = 0.0;
  double crps_h = std::numeric_limits<double>::quiet_NaN();  // NaN for zeros
  double crps_oracle = 0.0;
  double source_prob = std::numeric_limits<double>::quiet_NaN();
};

struct ScoreReport {
  std::vector<ObsScore> rows;
  int n_zero = 0;
  int n_pos = 0;
  double mean_crps_f = 0.0;
  double mean_crps_f_latent = 0.0;
  double mean_crps_h = 0.0;
  double tjur = 0.0;
  double auc_zero = 0.0;
  double auc_source = std::numeric_limits<double>::quiet_NaN();
};

/// Score a test set against per-site predictive distributions.
/// `zero_source_truth`, when given, holds 1 for unsuitability zeros and 0
/// for censored zeros (entries for positive observations are ignored).
ScoreReport score_predictions(const std::vector<PredictiveDist>& preds, const Eigen::VectorXd& y,
                              const std::optional<std::vector<int>>& zero_source_truth,
                              const ScoreOptions& opts = {});

}  // namespace zib
