#pragma once

// Seedable random-variate generation for the simulation protocol.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard for a given seed. Variates are produced by our own transforms of
// open-interval uniforms, never by <random> distributions, whose algorithms
// are implementation-defined. Every variate therefore reproduces bit-for-bit
// across platforms and standard libraries.

#include <cstdint>
#include <random>
#include <string>
#include <variant>

namespace itc {

/// Parameterized marginal distribution. Construct through the named
/// factories; each one rejects out-of-range parameters.
class DistributionSpec {
 public:
  struct Uniform01 {};
  struct Normal {
    double mean;
    double sd;
  };
  struct Poisson {
    double lambda;
  };
  struct Bernoulli {
    double p;
  };
  struct Exponential {
    double rate;
  };
  using Kind = std::variant<Uniform01, Normal, Poisson, Bernoulli, Exponential>;

  // Multiplicative inversion loses precision (and draws ~lambda uniforms)
  // beyond this.
  static constexpr double kMaxPoissonLambda = 30.0;

  static DistributionSpec uniform01();
  static DistributionSpec normal(double mean, double sd);
  static DistributionSpec poisson(double lambda);
  static DistributionSpec bernoulli(double p);
  static DistributionSpec exponential(double rate);

  const Kind& kind() const noexcept { return kind_; }

  /// Analytic mean, used by summaries and tests.
  double mean() const noexcept;

  /// Short human-readable form, e.g. "Normal(69.3, 5)".
  std::string describe() const;

  friend bool operator==(const DistributionSpec& a, const DistributionSpec& b);

 private:
  explicit DistributionSpec(Kind kind) : kind_(kind) {}
  Kind kind_;
};

// Pure transforms from a uniform in (0,1). Exposed so the inverse-transform
// identities can be checked with a forced uniform.
double exponential_from_uniform(double u, double rate);
double normal_from_uniform(double u, double mean, double sd);
bool bernoulli_from_uniform(double u, double p);

/// Single-owner stream of variates. Not thread-safe; give each concurrent
/// replicate its own stream (see derive_seed).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Number of underlying uniforms consumed so far.
  std::uint64_t draw_count() const noexcept { return draw_count_; }

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform();

  double draw(const DistributionSpec& dist);

 private:
  double poisson(double lambda);

  std::uint64_t seed_;
  std::uint64_t draw_count_ = 0;
  std::mt19937_64 engine_;
};

RandomStream seed_stream(std::uint64_t seed);

/// Substream seed for replicate `index` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return seed ^ index;
}

}  // namespace itc
