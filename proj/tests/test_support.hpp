#pragma once

// Oracles shared by the unit and acceptance tests. Nothing here calls into
// the code under test.

#include <Eigen/Core>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace itc::testing {

/// Central difference of f along each coordinate.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double step = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd hi = x, lo = x;
    hi[k] += step;
    lo[k] -= step;
    g[k] = (f(hi) - f(lo)) / (2.0 * step);
  }
  return g;
}

/// max_k |a_k - b_k| / max(1, |b|_inf)
inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

/// Asymptotic Kolmogorov tail probability P(K > x).
inline double kolmogorov_tail(double x) {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov p-value against a continuous CDF.
inline double ks_pvalue(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  const double root = std::sqrt(n);
  return kolmogorov_tail(d * (root + 0.12 + 0.11 / root));
}

/// Two-sample Kolmogorov-Smirnov p-value.
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return kolmogorov_tail(d * (ne + 0.12 + 0.11 / ne));
}

/// Pearson chi-square p-value of observed counts against expected counts.
inline double chi_square_pvalue(const std::vector<double>& observed, const std::vector<double>& expected) {
  double stat = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    stat += (observed[k] - expected[k]) * (observed[k] - expected[k]) / expected[k];
  }
  const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Small survival data set with random design, weights and (optionally) tied times.
struct CoxInstance {
  Eigen::VectorXd time;
  Eigen::VectorXi status;
  Eigen::MatrixXd Z;
  Eigen::VectorXd w;
  Eigen::VectorXd beta;  // a random evaluation point
};

inline CoxInstance random_cox_instance(std::mt19937_64& rng, int n, int p, bool ties) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution event(0.7);
  CoxInstance c;
  c.time.resize(n);
  c.status.resize(n);
  c.Z.resize(n, p);
  c.w.resize(n);
  c.beta.resize(p);
  for (int i = 0; i < n; ++i) {
    const double t = expo(rng);
    c.time[i] = ties ? std::ceil(4.0 * t) : t;
    c.status[i] = event(rng) ? 1 : 0;
    c.w[i] = unif(rng);
    for (int k = 0; k < p; ++k) c.Z(i, k) = normal(rng);
  }
  c.status[0] = 1;
  for (int k = 0; k < p; ++k) c.beta[k] = 0.5 * normal(rng);
  return c;
}

/// Weighted Breslow log partial likelihood by direct enumeration of risk sets.
inline double brute_partial_loglik(const Eigen::VectorXd& beta, const Eigen::VectorXd& time,
                                   const Eigen::VectorXi& status, const Eigen::MatrixXd& Z,
                                   const Eigen::VectorXd& w) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < time.size(); ++i) {
    if (status[i] != 1) continue;
    double denom = 0.0;
    for (Eigen::Index j = 0; j < time.size(); ++j) {
      if (time[j] >= time[i]) denom += w[j] * std::exp(Z.row(j).dot(beta));
    }
    ll += w[i] * (Z.row(i).dot(beta) - std::log(denom));
  }
  return ll;
}

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace itc::testing
