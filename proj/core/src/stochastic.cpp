#include "itc/stochastic.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace itc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

DistributionSpec DistributionSpec::uniform01() { return DistributionSpec(Uniform01{}); }

DistributionSpec DistributionSpec::normal(double mean, double sd) {
  require(std::isfinite(mean), "Normal: mean must be finite");
  require(std::isfinite(sd) && sd > 0.0, "Normal: sd must be positive and finite");
  return DistributionSpec(Normal{mean, sd});
}

DistributionSpec DistributionSpec::poisson(double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, "Poisson: lambda must be positive");
  require(lambda <= kMaxPoissonLambda, "Poisson: lambda must not exceed 30");
  return DistributionSpec(Poisson{lambda});
}

DistributionSpec DistributionSpec::bernoulli(double p) {
  require(p >= 0.0 && p <= 1.0, "Bernoulli: p must lie in [0,1]");
  return DistributionSpec(Bernoulli{p});
}

DistributionSpec DistributionSpec::exponential(double rate) {
  require(std::isfinite(rate) && rate > 0.0, "Exponential: rate must be positive");
  return DistributionSpec(Exponential{rate});
}

double DistributionSpec::mean() const noexcept {
  return std::visit(overloaded{
                        [](const Uniform01&) { return 0.5; },
                        [](const Normal& d) { return d.mean; },
                        [](const Poisson& d) { return d.lambda; },
                        [](const Bernoulli& d) { return d.p; },
                        [](const Exponential& d) { return 1.0 / d.rate; },
                    },
                    kind_);
}

std::string DistributionSpec::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Uniform01&) { os << "Uniform(0, 1)"; },
                 [&](const Normal& d) { os << "Normal(" << d.mean << ", " << d.sd << ")"; },
                 [&](const Poisson& d) { os << "Poisson(" << d.lambda << ")"; },
                 [&](const Bernoulli& d) { os << "Bernoulli(" << d.p << ")"; },
                 [&](const Exponential& d) { os << "Exponential(" << d.rate << ")"; },
             },
             kind_);
  return os.str();
}

bool operator==(const DistributionSpec& a, const DistributionSpec& b) {
  if (a.kind_.index() != b.kind_.index()) return false;
  return std::visit(
      overloaded{
          [&](const DistributionSpec::Uniform01&) { return true; },
          [&](const DistributionSpec::Normal& d) {
            const auto& o = std::get<DistributionSpec::Normal>(b.kind_);
            return d.mean == o.mean && d.sd == o.sd;
          },
          [&](const DistributionSpec::Poisson& d) {
            return d.lambda == std::get<DistributionSpec::Poisson>(b.kind_).lambda;
          },
          [&](const DistributionSpec::Bernoulli& d) {
            return d.p == std::get<DistributionSpec::Bernoulli>(b.kind_).p;
          },
          [&](const DistributionSpec::Exponential& d) {
            return d.rate == std::get<DistributionSpec::Exponential>(b.kind_).rate;
          },
      },
      a.kind_);
}

double exponential_from_uniform(double u, double rate) { return -std::log(u) / rate; }

double normal_from_uniform(double u, double mean, double sd) {
  static const boost::math::normal_distribution<double> standard;
  return mean + sd * boost::math::quantile(standard, u);
}

bool bernoulli_from_uniform(double u, double p) { return u < p; }

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

RandomStream seed_stream(std::uint64_t seed) { return RandomStream(seed); }

double RandomStream::uniform() {
  // Top 53 bits, shifted to the cell midpoint so 0 and 1 are unreachable.
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const std::uint64_t bits = engine_() >> 11;
  ++draw_count_;
  return (static_cast<double>(bits) + 0.5) * kScale;
}

double RandomStream::poisson(double lambda) {
  const double floor = std::exp(-lambda);
  double product = uniform();
  double k = 0.0;
  while (product > floor) {
    product *= uniform();
    k += 1.0;
  }
  return k;
}

double RandomStream::draw(const DistributionSpec& dist) {
  return std::visit(
      overloaded{
          [&](const DistributionSpec::Uniform01&) { return uniform(); },
          [&](const DistributionSpec::Normal& d) {
            return normal_from_uniform(uniform(), d.mean, d.sd);
          },
          [&](const DistributionSpec::Poisson& d) { return poisson(d.lambda); },
          [&](const DistributionSpec::Bernoulli& d) {
            return bernoulli_from_uniform(uniform(), d.p) ? 1.0 : 0.0;
          },
          [&](const DistributionSpec::Exponential& d) {
            return exponential_from_uniform(uniform(), d.rate);
          },
      },
      dist.kind());
}

}  // namespace itc
