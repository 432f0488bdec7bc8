#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "zib/betadist.hpp"

using namespace zib;

namespace {

// Quadrature of the Beta density with the endpoint singularities removed
// by the substitutions t = v^a (left half) and t = (1-v)^b (right half).
double beta_mass_oracle(const BetaMS& p, double lo, double hi, double tol = 1e-10) {
  const double a = p.alpha();
  const double b = p.beta();
  const double logB = lbeta(a, b);

  double total = 0.0;
  const double split_lo = std::min(hi, 0.5);
  const double split_hi = std::max(lo, 0.5);
  if (lo < split_lo) {
    auto left = [&](double t) {
      const double v = std::pow(t, 1.0 / a);
      return std::exp((b - 1.0) * std::log1p(-v) - logB) / a;
    };
    total += test_support::integrate(left, std::pow(lo, a), std::pow(split_lo, a), tol);
  }
  if (split_hi < hi) {
    auto right = [&](double t) {
      const double v = 1.0 - std::pow(t, 1.0 / b);
      return std::exp((a - 1.0) * std::log(v) - logB) / b;
    };
    total += test_support::integrate(right, std::pow(1.0 - hi, b), std::pow(1.0 - split_hi, b), tol);
  }
  return total;
}

}  // namespace

TEST_CASE("reparam arithmetic and round trip") {
  auto [a1, b1] = reparam(0.5, 2.0);
  CHECK(a1 == doctest::Approx(1.0));
  CHECK(b1 == doctest::Approx(1.0));
  auto [a2, b2] = reparam(0.25, 4.0);
  CHECK(a2 == doctest::Approx(1.0));
  CHECK(b2 == doctest::Approx(3.0));
  auto [a3, b3] = reparam(0.443, 1.547);
  CHECK(a3 == doctest::Approx(0.6853).epsilon(1e-3));
  CHECK(b3 == doctest::Approx(0.8617).epsilon(1e-3));

  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const double mu = rng.uniform(0.05, 0.95);
    const double psi = rng.uniform(0.2, 20.0);
    auto [a, b] = reparam(mu, psi);
    auto [m2, p2] = reparam_inverse(a, b);
    CHECK(m2 == doctest::Approx(mu).epsilon(1e-12));
    CHECK(p2 == doctest::Approx(psi).epsilon(1e-12));
  }
  CHECK_THROWS_AS(reparam(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(reparam(0.5, -1.0), DomainError);
}

TEST_CASE("beta log density closed-form cases and normalization") {
  CHECK(beta_log_density(0.3, BetaMS(0.5, 2.0)) == doctest::Approx(0.0));
  CHECK(beta_log_density(0.5, BetaMS(0.5, 4.0)) == doctest::Approx(std::log(1.5)));
  CHECK_THROWS_AS(beta_log_density(0.0, BetaMS(0.5, 2.0)), DomainError);

  Rng rng(101);
  for (int i = 0; i < 100; ++i) {
    BetaMS p(rng.uniform(0.05, 0.95), rng.uniform(0.2, 20.0));
    CHECK(beta_mass_oracle(p, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("beta cdf against quadrature oracle") {
  CHECK(beta_cdf(0.5, BetaMS(0.5, 7.3)) == doctest::Approx(0.5));
  CHECK(beta_cdf(0.0, BetaMS(0.3, 2.0)) == 0.0);
  CHECK(beta_cdf(1.0, BetaMS(0.3, 2.0)) == 1.0);

  Rng rng(7);
  for (int i = 0; i < 40; ++i) {
    BetaMS p(rng.uniform(0.05, 0.95), rng.uniform(0.2, 20.0));
    const double v = rng.uniform(0.02, 0.98);
    CHECK(beta_cdf(v, p) == doctest::Approx(beta_mass_oracle(p, 0.0, v)).epsilon(1e-7));
  }
  // The named case from the paper's posterior-mean neighborhood.
  BetaMS q(0.622, 1.547);
  CHECK(beta_cdf(0.5, q) == doctest::Approx(beta_mass_oracle(q, 0.0, 0.5)).epsilon(1e-9));

  // Monotone on a grid.
  BetaMS p(0.31, 5.7);
  double prev = 0.0;
  for (int k = 1; k <= 50; ++k) {
    const double c = beta_cdf(k / 50.0, p);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("incomplete beta symmetry identity") {
  Rng rng(3);
  for (int i = 0; i < 40; ++i) {
    const double a = rng.uniform(0.2, 15.0);
    const double b = rng.uniform(0.2, 15.0);
    const double x = rng.uniform(0.01, 0.99);
    CHECK(reg_inc_beta(x, a, b) ==
          doctest::Approx(1.0 - reg_inc_beta(1.0 - x, b, a)).epsilon(1e-12));
  }
}

TEST_CASE("inverse cdf round trip") {
  Rng rng(19);
  for (int i = 0; i < 50; ++i) {
    BetaMS p(rng.uniform(0.05, 0.95), rng.uniform(0.3, 25.0));
    const double u = rng.uniform(0.001, 0.999);
    const double v = beta_inv_cdf(u, p);
    CHECK(beta_cdf(v, p) == doctest::Approx(u).epsilon(1e-9));
  }
  CHECK(beta_inv_cdf(0.0, BetaMS(0.4, 3.0)) == 0.0);
  CHECK(beta_inv_cdf(1.0, BetaMS(0.4, 3.0)) == 1.0);
}

TEST_CASE("extended beta change of variables") {
  CHECK(extended_beta_log_density(0.0, BetaMS(0.5, 2.0)) == doctest::Approx(std::log(0.5)));
  CHECK(extended_beta_log_density(-0.5, BetaMS(0.5, 2.0)) == doctest::Approx(std::log(0.5)));
  BetaMS p(0.6, 3.0);
  CHECK(extended_beta_log_density(0.4, p) ==
        doctest::Approx(beta_log_density(0.7, p) - std::log(2.0)));
  CHECK(extended_beta_cdf(0.0, BetaMS(0.5, 7.0)) == doctest::Approx(0.5));
  CHECK(extended_beta_cdf(-1.0, p) == 0.0);
  CHECK(extended_beta_cdf(1.0, p) == 1.0);
  Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    const double w = rng.uniform(-0.99, 0.99);
    CHECK(extended_beta_cdf(w, p) == beta_cdf((w + 1.0) / 2.0, p));
  }
  BetaMS q(0.3, 2.0);
  CHECK(extended_beta_cdf(0.0, q) == doctest::Approx(beta_mass_oracle(q, 0.0, 0.5)).epsilon(1e-8));
}

TEST_CASE("beta sampler moments") {
  Rng rng(23);
  const int n = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = sample_beta(rng, BetaMS(0.5, 2.0));
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / n;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
  CHECK(s2 / n - mean * mean == doctest::Approx(1.0 / 12.0).epsilon(0.06));

  double m2 = 0.0;
  for (int i = 0; i < n; ++i) m2 += sample_beta(rng, BetaMS(0.25, 4.0));
  CHECK(m2 / n == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("truncated sampler matches a rejection oracle") {
  Rng rng(31);
  BetaMS p(0.5, 4.0);
  const int n = 20000;
  std::vector<double> inv(n), rej;
  for (int i = 0; i < n; ++i) {
    inv[i] = sample_beta_truncated(rng, p, 0.0, 0.5);
    CHECK(inv[i] > 0.0);
    CHECK(inv[i] < 0.5);
  }
  while (static_cast<int>(rej.size()) < n) {
    const double v = sample_beta(rng, p);
    if (v < 0.5) rej.push_back(v);
  }
  CHECK(test_support::ks_two_sample(inv, rej) > 0.01);

  // Uniform case: mean 0.25 on (0, 0.5).
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += sample_beta_truncated(rng, BetaMS(0.5, 2.0), 0.0, 0.5);
  CHECK(s / n == doctest::Approx(0.25).epsilon(0.02));

  CHECK_THROWS_AS(sample_beta_truncated(rng, BetaMS(0.999, 500.0), 1e-9, 2e-9),
                  DegenerateTruncationError);
}

TEST_CASE("link functions") {
  CHECK(link_logit_inv(0.0) == doctest::Approx(0.5));
  CHECK(link_log_inv(0.0) == doctest::Approx(1.0));
  CHECK(link_logit_inv(-0.9365) == doctest::Approx(0.2817).epsilon(2e-4));
  CHECK(link_logit_inv(-1e9) == doctest::Approx(1e-12));
  CHECK(link_log_inv(1e9) == doctest::Approx(1e12));
  CHECK_THROWS_AS(link_logit_inv(std::nan("")), DomainError);
  CHECK(logit(link_logit_inv(1.7)) == doctest::Approx(1.7).epsilon(1e-10));
  CHECK_THROWS_AS(logit(0.0), DomainError);
}
