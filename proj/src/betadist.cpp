#include "zib/betadist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zib {

namespace {

constexpr double kLinkEps = 1e-12;
constexpr double kExpCap = 1e12;

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double x, double a, double b) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

std::pair<double, double> reparam(double mu, double psi) {
  BetaMS p(mu, psi);  // validates the domain
  return {p.alpha(), p.beta()};
}

std::pair<double, double> reparam_inverse(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw DomainError("reparam_inverse: require alpha > 0 and beta > 0");
  return {alpha / (alpha + beta), alpha + beta};
}

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double reg_inc_beta(double x, double a, double b) {
  return reg_inc_beta(x, a, b, lbeta(a, b));
}

double reg_inc_beta(double x, double a, double b, double lbeta_ab) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("reg_inc_beta: require a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lfront = a * std::log(x) + b * std::log1p(-x) - lbeta_ab;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(lfront) * betacf(x, a, b) / a;
  }
  return 1.0 - std::exp(lfront) * betacf(1.0 - x, b, a) / b;
}

double beta_log_density(double v, const BetaMS& p) {
  if (!(v > 0.0 && v < 1.0)) throw DomainError("beta_log_density: v must lie in (0,1)");
  const double a = p.alpha();
  const double b = p.beta();
  return (a - 1.0) * std::log(v) + (b - 1.0) * std::log1p(-v) - lbeta(a, b);
}

double beta_cdf(double v, const BetaMS& p) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError("beta_cdf: v must lie in [0,1]");
  return reg_inc_beta(v, p.alpha(), p.beta());
}

double beta_inv_cdf(double u, const BetaMS& p) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("beta_inv_cdf: u must lie in [0,1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  double x = p.mu;  // start at the mean
  double fx = beta_cdf(x, p) - u;
  for (int it = 0; it < 200; ++it) {
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    if (std::fabs(fx) < 1e-12 || hi - lo < 1e-15) break;
    // Newton step, fall back to bisection when it leaves the bracket.
    double step_x = hi;
    if (x > 0.0 && x < 1.0) {
      const double pdf = std::exp(beta_log_density(std::clamp(x, 1e-300, 1.0 - 1e-16), p));
      if (pdf > 0.0 && std::isfinite(pdf)) step_x = x - fx / pdf;
    }
    x = (step_x > lo && step_x < hi) ? step_x : 0.5 * (lo + hi);
    fx = beta_cdf(x, p) - u;
  }
  return x;
}

double extended_beta_log_density(double w, const BetaMS& p) {
  if (!(w > -1.0 && w < 1.0))
    throw DomainError("extended_beta_log_density: w must lie in (-1,1)");
  return beta_log_density((w + 1.0) / 2.0, p) - std::log(2.0);
}

double extended_beta_cdf(double w, const BetaMS& p) {
  if (!(w >= -1.0 && w <= 1.0)) throw DomainError("extended_beta_cdf: w must lie in [-1,1]");
  return beta_cdf((w + 1.0) / 2.0, p);
}

double sample_beta(Rng& rng, const BetaMS& p) {
  const double g1 = rng.gamma(p.alpha());
  const double g2 = rng.gamma(p.beta());
  double v = g1 / (g1 + g2);
  // Keep draws strictly interior for downstream log densities.
  return std::clamp(v, 1e-15, 1.0 - 1e-15);
}

double sample_beta_truncated(Rng& rng, const BetaMS& p, double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
    throw DomainError("sample_beta_truncated: require 0 <= lo < hi <= 1");
  const double clo = beta_cdf(lo, p);
  const double chi = beta_cdf(hi, p);
  if (chi - clo < 1e-300)
    throw DegenerateTruncationError("sample_beta_truncated: truncation window has no mass");
  const double u = clo + (chi - clo) * rng.uniform();
  double v = beta_inv_cdf(u, p);
  if (v <= lo) v = std::nextafter(lo, 1.0);
  if (v >= hi) v = std::nextafter(hi, 0.0);
  return v;
}

double link_logit_inv(double x) {
  require_finite(x, "link_logit_inv");
  const double p = 1.0 / (1.0 + std::exp(-x));
  return std::clamp(p, kLinkEps, 1.0 - kLinkEps);
}

double link_log_inv(double x) {
  require_finite(x, "link_log_inv");
  return std::clamp(std::exp(x), kLinkEps, kExpCap);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("logit: p must lie in (0,1)");
  return std::log(p / (1.0 - p));
}

}  // namespace zib
