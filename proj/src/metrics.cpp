#include "zib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace zib {

PredComponent PredComponent::make(double pi, double mu, double psi, ModelKind kind) {
  const BetaMS p(mu, psi);
  PredComponent c;
  c.pi = pi;
  c.mu = mu;
  c.psi = psi;
  c.alpha = p.alpha();
  c.beta = p.beta();
  c.lbeta_ab = lbeta(c.alpha, c.beta);
  c.f05 = reg_inc_beta(0.5, c.alpha, c.beta, c.lbeta_ab);
  c.prob_zero = zib::prob_zero(pi, p, kind);
  return c;
}

PredictiveDist PredictiveDist::from_components(ModelKind kind, std::vector<PredComponent> comps,
                                               std::vector<double> ensemble) {
  if (comps.empty()) throw MetricError("PredictiveDist: empty component set");
  PredictiveDist d;
  d.kind = kind;
  d.comps = std::move(comps);
  d.ensemble = std::move(ensemble);
  double s = 0.0;
  for (const auto& c : d.comps) s += c.prob_zero;
  d.p0 = s / static_cast<double>(d.comps.size());
  return d;
}

double PredictiveDist::cdf(double x) const {
  double s = 0.0;
  for (const auto& c : comps) {
    if (kind == ModelKind::BEZI) {
      s += c.pi + (1.0 - c.pi) * reg_inc_beta(x, c.alpha, c.beta, c.lbeta_ab);
    } else {
      const double fv = reg_inc_beta((x + 1.0) / 2.0, c.alpha, c.beta, c.lbeta_ab);
      s += c.prob_zero + (1.0 - c.pi) * (fv - c.f05);
    }
  }
  return s / static_cast<double>(comps.size());
}

double PredictiveDist::positive_cdf(double x) const {
  if (1.0 - p0 < 1e-12) throw MetricError("positive_cdf: predictive has no positive mass");
  return std::clamp((cdf(x) - p0) / (1.0 - p0), 0.0, 1.0);
}

double PredictiveDist::latent_cdf(double x) const {
  double s = 0.0;
  for (const auto& c : comps)
    s += (1.0 - c.pi) * reg_inc_beta((x + 1.0) / 2.0, c.alpha, c.beta, c.lbeta_ab);
  return s / static_cast<double>(comps.size());
}

double PredictiveDist::mean() const {
  double s = 0.0;
  for (const auto& c : comps) {
    if (kind == ModelKind::BEZI) {
      s += (1.0 - c.pi) * c.mu;
    } else {
      const auto [a, b] = reparam(c.mu, c.psi);
      // E[(2V-1) 1(V > 1/2)]: shift the shape for the first moment piece.
      const double tail_mean = 1.0 - reg_inc_beta(0.5, a + 1.0, b);
      const double tail = 1.0 - c.f05;
      s += (1.0 - c.pi) * (2.0 * c.mu * tail_mean - tail);
    }
  }
  return s / static_cast<double>(comps.size());
}

double PredictiveDist::source_prob() const {
  if (kind == ModelKind::BEZI) return 1.0;
  // P(Z=1 | Y=0, data): posterior-averaged joint over posterior-averaged
  // marginal, not the average of per-sample conditionals.
  double num = 0.0, den = 0.0;
  for (const auto& c : comps) {
    num += c.pi;
    den += c.prob_zero;
  }
  return num / den;
}

McResult mc_integrate(const std::function<double(double)>& f, double a, double b, int n_samples,
                      Rng& rng) {
  if (!(a < b)) throw IntegrationError("mc_integrate: require a < b");
  if (n_samples < 1) throw IntegrationError("mc_integrate: need at least one sample");
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double v = f(rng.uniform(a, b));
    if (!std::isfinite(v)) throw IntegrationError("mc_integrate: non-finite integrand value");
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sumsq / n - mean * mean);
  McResult r;
  r.value = (b - a) * mean;
  r.se = n_samples > 1 ? (b - a) * std::sqrt(var / (n - 1.0)) : 0.0;
  return r;
}

McResult crps_full(const PredictiveDist& pred, double y, int n_mc, Rng& rng,
                   CrpsZeroBranch mode) {
  if (pred.comps.empty()) throw MetricError("crps_full: empty predictive");
  if (!(y >= 0.0 && y < 1.0)) throw MetricError("crps_full: y must lie in [0,1)");
  McResult integral;
  double mass_term;
  if (y > 0.0) {
    mass_term = pred.p0 * pred.p0;
    integral = mc_integrate(
        [&](double x) {
          const double d = pred.cdf(x) - (y < x ? 1.0 : 0.0);
          return d * d;
        },
        0.0, 1.0, n_mc, rng);
  } else {
    mass_term = (1.0 - pred.p0) * (1.0 - pred.p0);
    if (mode == CrpsZeroBranch::bounded) {
      integral = mc_integrate(
          [&](double x) {
            const double d = 1.0 - pred.cdf(x);
            return d * d;
          },
          0.0, 1.0, n_mc, rng);
    } else {
      integral = mc_integrate(
          [&](double x) {
            const double d = 1.0 - pred.latent_cdf(x);
            return d * d;
          },
          -1.0, 0.0, n_mc, rng);
    }
  }
  return {mass_term + integral.value, integral.se};
}

McResult crps_hurdle(const PredictiveDist& pred, double y, int n_mc, Rng& rng) {
  if (pred.comps.empty()) throw MetricError("crps_hurdle: empty predictive");
  if (!(y > 0.0)) throw MetricError("crps_hurdle: y must be positive");
  if (1.0 - pred.p0 < 1e-12) throw MetricError("crps_hurdle: no positive predictive mass");
  return mc_integrate(
      [&](double x) {
        const double d = pred.positive_cdf(x) - (y < x ? 1.0 : 0.0);
        return d * d;
      },
      0.0, 1.0, n_mc, rng);
}

double crps_sample_oracle(std::vector<double> ensemble, double y) {
  const int n = static_cast<int>(ensemble.size());
  if (n < 2) throw MetricError("crps_sample_oracle: need at least 2 draws");
  std::sort(ensemble.begin(), ensemble.end());
  double abs_err = 0.0;
  double pair_sum = 0.0;  // sum over all ordered pairs of |x_i - x_j|
  for (int k = 0; k < n; ++k) {
    abs_err += std::fabs(ensemble[k] - y);
    pair_sum += ensemble[k] * (2.0 * k - n + 1.0);
  }
  pair_sum *= 2.0;
  const double nn = static_cast<double>(n);
  return abs_err / nn - 0.5 * pair_sum / (nn * nn);
}

double tjur_r2(const std::vector<double>& fitted_probs, const std::vector<int>& labels) {
  if (fitted_probs.size() != labels.size()) throw MetricError("tjur_r2: size mismatch");
  double s1 = 0.0, s0 = 0.0;
  int n1 = 0, n0 = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      s1 += fitted_probs[i];
      ++n1;
    } else {
      s0 += fitted_probs[i];
      ++n0;
    }
  }
  if (n1 == 0 || n0 == 0) throw MetricError("tjur_r2: both classes must be present");
  return s1 / n1 - s0 / n0;
}

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const size_t n = scores.size();
  if (labels.size() != n) throw MetricError("roc_auc: size mismatch");
  size_t n1 = 0, n0 = 0;
  for (int l : labels) (l == 1 ? n1 : n0)++;
  if (n1 == 0 || n0 == 0) throw MetricError("roc_auc: both classes must be present");

  // AUC as the Mann-Whitney statistic with midranks for ties.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += midrank;
    i = j + 1;
  }
  const double auc =
      (rank_sum_pos - 0.5 * n1 * (n1 + 1.0)) / (static_cast<double>(n1) * n0);

  // Curve: sweep thresholds over unique score values, descending.
  RocResult r;
  r.auc = auc;
  r.curve.emplace_back(0.0, 0.0);
  size_t tp = 0, fp = 0;
  for (size_t k = n; k-- > 0;) {
    const size_t idx = order[k];
    if (labels[idx] == 1)
      ++tp;
    else
      ++fp;
    const bool boundary = k == 0 || scores[order[k - 1]] != scores[idx];
    if (boundary)
      r.curve.emplace_back(static_cast<double>(fp) / n0, static_cast<double>(tp) / n1);
  }
  return r;
}

std::vector<PredictiveDist> predictive_at_sites(const ChainOutput& chain,
                                                const Eigen::MatrixXd& new_X,
                                                const Eigen::MatrixXd& new_G,
                                                const std::optional<Eigen::MatrixXd>& new_coords,
                                                const std::optional<Eigen::MatrixXd>& train_coords,
                                                const PredictOptions& opts) {
  const ModelKind kind = chain.kind;
  const bool spatial = is_spatial(kind);
  const bool has_gamma = kind != ModelKind::M0;
  const int m = static_cast<int>(new_X.rows());
  if (new_G.rows() != m) throw SpecificationError("predictive_at_sites: X/G row mismatch");
  if (spatial && (!new_coords || !train_coords))
    throw SpecificationError("predictive_at_sites: spatial model requires coordinates");

  int px = 0, pg = 0;
  for (const auto& nm : chain.names) {
    if (nm.rfind("gamma_", 0) == 0) ++px;
    if (nm.rfind("delta_", 0) == 0) ++pg;
  }
  if (has_gamma && new_X.cols() != px)
    throw SpecificationError("predictive_at_sites: X design width mismatch with chain");
  if (new_G.cols() != pg)
    throw SpecificationError("predictive_at_sites: G design width mismatch with chain");

  const int kept = chain.n_kept();
  int stride = 1;
  if (opts.max_samples > 0 && kept > opts.max_samples) stride = kept / opts.max_samples;
  std::vector<int> rows;
  for (int r = 0; r < kept; r += stride) rows.push_back(r);

  const int gamma0 = has_gamma ? chain.col("gamma_0") : -1;
  const int delta0 = chain.col("delta_0");
  const int psi_col = chain.col("log_psi");
  const int phi_col = spatial ? chain.col("phi") : -1;
  const int eff0 = spatial ? chain.col("eff_0") : -1;
  const int n_train = spatial ? static_cast<int>(train_coords->rows()) : 0;

  std::optional<Eigen::MatrixXd> Dtrain, cross;
  if (spatial) {
    Dtrain = distance_matrix(*train_coords);
    cross = Eigen::MatrixXd(n_train, m);
    for (int i = 0; i < n_train; ++i)
      for (int j = 0; j < m; ++j)
        (*cross)(i, j) = (train_coords->row(i) - new_coords->row(j)).norm();
  }

  Rng rng(opts.seed);
  std::vector<std::vector<PredComponent>> comps(m);
  std::vector<std::vector<double>> ens(m);

  for (int r : rows) {
    Eigen::VectorXd gamma(px), delta(pg);
    for (int j = 0; j < px; ++j) gamma[j] = has_gamma ? chain.samples(r, gamma0 + j) : 0.0;
    for (int j = 0; j < pg; ++j) delta[j] = chain.samples(r, delta0 + j);
    const double psi = std::exp(chain.samples(r, psi_col));

    Eigen::VectorXd eff = Eigen::VectorXd::Zero(m);
    if (spatial) {
      const double phi = chain.samples(r, phi_col);
      Eigen::VectorXd train_eff(n_train);
      for (int i = 0; i < n_train; ++i) train_eff[i] = chain.samples(r, eff0 + i);
      const Eigen::MatrixXd C = exp_covariance(*Dtrain, phi);
      const GPFactor F = chol_jitter(C);
      const Eigen::MatrixXd Cs = (-phi * cross->array()).exp().matrix();
      const Eigen::VectorXd alpha = F.L.transpose().triangularView<Eigen::Upper>().solve(
          Eigen::VectorXd(F.L.triangularView<Eigen::Lower>().solve(train_eff)));
      const Eigen::MatrixXd W = F.L.triangularView<Eigen::Lower>().solve(Cs);
      for (int j = 0; j < m; ++j) {
        const double mean = Cs.col(j).dot(alpha);
        const double var = std::max(0.0, 1.0 - W.col(j).squaredNorm());
        eff[j] = mean + std::sqrt(var) * rng.normal();
      }
    }

    for (int j = 0; j < m; ++j) {
      double pi = 0.0;
      if (has_gamma) {
        double eta = new_X.row(j).dot(gamma);
        if (kind == ModelKind::M3) eta += eff[j];
        pi = link_logit_inv(eta);
      }
      double eta_mu = new_G.row(j).dot(delta);
      if (kind == ModelKind::M2) eta_mu += eff[j];
      const double mu = link_logit_inv(eta_mu);
      comps[j].push_back(PredComponent::make(pi, mu, psi, kind));

      for (int e = 0; e < opts.ensemble_per_sample; ++e) {
        double draw;
        if (kind == ModelKind::BEZI) {
          draw = rng.uniform() < pi ? 0.0 : sample_beta(rng, BetaMS(mu, psi));
        } else if (pi > 0.0 && rng.uniform() < pi) {
          draw = 0.0;
        } else {
          const double w = 2.0 * sample_beta(rng, BetaMS(mu, psi)) - 1.0;
          draw = std::max(0.0, w);
        }
        ens[j].push_back(draw);
      }
    }
  }

  std::vector<PredictiveDist> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j)
    out.push_back(PredictiveDist::from_components(kind, std::move(comps[j]), std::move(ens[j])));
  return out;
}

ScoreReport score_predictions(const std::vector<PredictiveDist>& preds, const Eigen::VectorXd& y,
                              const std::optional<std::vector<int>>& zero_source_truth,
                              const ScoreOptions& opts) {
  const int m = static_cast<int>(preds.size());
  if (y.size() != m) throw MetricError("score_predictions: prediction/observation count mismatch");
  if (zero_source_truth && static_cast<int>(zero_source_truth->size()) != m)
    throw MetricError("score_predictions: truth length mismatch");

  Rng rng(opts.seed);
  ScoreReport rep;
  rep.rows.resize(m);
  std::vector<double> p0s(m);
  std::vector<int> zero_labels(m);
  double sum_f = 0.0, sum_fl = 0.0, sum_h = 0.0;

  for (int j = 0; j < m; ++j) {
    ObsScore& s = rep.rows[j];
    s.y = y[j];
    s.p0 = preds[j].p0;
    p0s[j] = preds[j].p0;
    zero_labels[j] = y[j] == 0.0 ? 1 : 0;

    const auto f = crps_full(preds[j], y[j], opts.crps_mc_samples, rng, CrpsZeroBranch::bounded);
    s.crps_f = f.value;
    s.crps_f_se = f.se;
    if (y[j] == 0.0) {
      s.crps_f_latent =
          crps_full(preds[j], y[j], opts.crps_mc_samples, rng, CrpsZeroBranch::latent).value;
      ++rep.n_zero;
      s.source_prob = preds[j].source_prob();
    } else {
      s.crps_f_latent = s.crps_f;
      s.crps_h = crps_hurdle(preds[j], y[j], opts.crps_mc_samples, rng).value;
      sum_h += s.crps_h;
      ++rep.n_pos;
    }
    s.crps_oracle = crps_sample_oracle(preds[j].ensemble, y[j]);
    sum_f += s.crps_f;
    sum_fl += s.crps_f_latent;
  }

  rep.mean_crps_f = sum_f / m;
  rep.mean_crps_f_latent = sum_fl / m;
  if (rep.n_pos == 0) throw MetricError("score_predictions: no positive test points for CRPS_h");
  rep.mean_crps_h = sum_h / rep.n_pos;
  rep.tjur = tjur_r2(p0s, zero_labels);
  rep.auc_zero = roc_auc(p0s, zero_labels).auc;

  if (zero_source_truth) {
    std::vector<double> src_scores;
    std::vector<int> src_labels;
    for (int j = 0; j < m; ++j) {
      if (y[j] != 0.0) continue;
      src_scores.push_back(rep.rows[j].source_prob);
      src_labels.push_back((*zero_source_truth)[j]);
    }
    try {
      rep.auc_source = roc_auc(src_scores, src_labels).auc;
    } catch (const MetricError&) {
      // single-class truth among zeros: leave NaN
    }
  }
  return rep;
}

}  // namespace zib
