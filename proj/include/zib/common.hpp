#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace zib {

// Error categories map onto distinct CLI exit codes.
enum class Errc : int {
  usage = 64,
  ingestion = 65,
  specification = 66,
  domain = 67,
  sampler_state = 70,
  metric = 71,
  integration = 72,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  Errc code_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& w) : Error(Errc::usage, w) {}
};
struct IngestionError : Error {
  explicit IngestionError(const std::string& w) : Error(Errc::ingestion, w) {}
};
struct SpecificationError : Error {
  explicit SpecificationError(const std::string& w) : Error(Errc::specification, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(Errc::domain, w) {}
};
struct DegenerateTruncationError : DomainError {
  explicit DegenerateTruncationError(const std::string& w) : DomainError(w) {}
};
struct SamplerStateError : Error {
  explicit SamplerStateError(const std::string& w) : Error(Errc::sampler_state, w) {}
};
struct MetricError : Error {
  explicit MetricError(const std::string& w) : Error(Errc::metric, w) {}
};
struct IntegrationError : Error {
  explicit IntegrationError(const std::string& w) : Error(Errc::integration, w) {}
};

/// Random stream with explicitly implemented transformations so that a given
/// seed yields the same draw sequence on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on the open interval (0,1).
  double uniform() {
    // 53-bit mantissa; shift by half an ulp away from 0.
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  std::uint64_t integer(std::uint64_t n) {
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = gen_();
    } while (r >= limit);
    return r % n;
  }

  /// Derive an independent stream (e.g. one per chain or replicate).
  Rng spawn(std::uint64_t stream) {
    std::uint64_t s = gen_() ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    return Rng(s);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite value");
}

}  // namespace zib
