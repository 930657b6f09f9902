#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "lsirm/rng.hpp"
#include "lsirm/types.hpp"

namespace lsirm::testing {

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

/// Two-sided one-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

/// Regularized upper incomplete gamma Q(a, x) for the Inv-Gamma CDF.
inline double upper_gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 1000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // Lentz continued fraction.
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int n = 1; n < 1000; ++n) {
    const double an = -n * (n - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

/// CDF of Inv-Gamma(shape, scale): Q(shape, scale / x).
inline double inverse_gamma_cdf(double x, double shape, double scale) {
  return x <= 0.0 ? 0.0 : upper_gamma_q(shape, scale / x);
}

/// CDF of the alpha marginal when alpha | s2 ~ N(0, s2) and s2 ~ Inv-Gamma(1, 1):
/// a Student t with 2 degrees of freedom and unit scale.
inline double t2_cdf(double t) { return 0.5 + t / (2.0 * std::sqrt(2.0 + t * t)); }

/// Chi distribution CDF with k degrees of freedom: P(k/2, r^2/2).
inline double chi_cdf(double r, double k) {
  return r <= 0.0 ? 0.0 : 1.0 - upper_gamma_q(0.5 * k, 0.5 * r * r);
}

inline ParameterState random_state(std::size_t n, std::size_t items, std::size_t p,
                                   KernelKind kind, Metric metric, std::uint64_t seed) {
  Rng rng(seed);
  ParameterState s;
  s.main.alpha = Eigen::VectorXd(static_cast<Eigen::Index>(n));
  s.main.beta = Eigen::VectorXd(static_cast<Eigen::Index>(items));
  for (auto& v : s.main.alpha) v = rng.normal(0.0, 1.5);
  for (auto& v : s.main.beta) v = rng.normal(0.0, 1.5);
  s.latent = LatentConfiguration::zeros(n, items, p);
  for (Eigen::Index r = 0; r < s.latent.respondents.size(); ++r)
    s.latent.respondents.data()[r] = rng.normal();
  for (Eigen::Index r = 0; r < s.latent.items.size(); ++r) s.latent.items.data()[r] = rng.normal();
  s.kernel = {kind, metric, kind == KernelKind::distance ? std::exp(rng.normal(0.5, 0.5)) : 0.0};
  s.sigma2 = std::exp(rng.normal());
  return s;
}

inline ResponseMatrix random_responses(std::size_t n, std::size_t items, std::uint64_t seed,
                                       double missing_rate = 0.0) {
  Rng rng(seed);
  ResponseMatrix data(n, items);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < items; ++i)
      if (!rng.bernoulli(missing_rate)) data.set(j, i, rng.bernoulli(0.5) ? 1 : 0);
  return data;
}

}  // namespace lsirm::testing
