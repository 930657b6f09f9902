#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

#include "lsirm/types.hpp"

namespace lsirm {

/// Selected norm of a - b. Throws InputError on dimension mismatch or empty
/// vectors.
double distance(std::span<const double> a, std::span<const double> b,
                Metric metric);

/// Unchecked variant used in the sampler inner loops.
inline double distance_unchecked(const double* a, const double* b,
                                 std::size_t p, Metric metric) {
  double acc = 0.0;
  switch (metric) {
    case Metric::l1:
      for (std::size_t k = 0; k < p; ++k) acc += std::abs(a[k] - b[k]);
      return acc;
    case Metric::l2:
      for (std::size_t k = 0; k < p; ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
      }
      return std::sqrt(acc);
    case Metric::linf:
      for (std::size_t k = 0; k < p; ++k) acc = std::max(acc, std::abs(a[k] - b[k]));
      return acc;
  }
  return acc;
}

/// Kernel-specific raw interaction between two positions: the distance for
/// KernelKind::distance (to be scaled by -gamma), the inner product for
/// KernelKind::multiplicative, and 0 for KernelKind::none.
inline double raw_interaction(const double* a, const double* b, std::size_t p,
                              const InteractionKernel& kernel) {
  switch (kernel.kind) {
    case KernelKind::distance:
      return distance_unchecked(a, b, p, kernel.metric);
    case KernelKind::multiplicative: {
      double acc = 0.0;
      for (std::size_t k = 0; k < p; ++k) acc += a[k] * b[k];
      return acc;
    }
    case KernelKind::none:
      return 0.0;
  }
  return 0.0;
}

/// Contribution g(a, b) of a raw interaction to the log odds.
inline double interaction_effect(double raw, const InteractionKernel& kernel) {
  return kernel.kind == KernelKind::distance ? -kernel.gamma * raw : raw;
}

/// log(1 + exp(x)) without overflow; branches at 0.
inline double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Bernoulli log-mass of y in {0,1} at log odds eta.
inline double bernoulli_log_mass(int y, double eta) {
  return (y != 0 ? eta : 0.0) - log1p_exp(eta);
}

/// Logistic function, stable for large |eta|.
inline double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

inline double normal_log_density(double x, double mean, double variance) {
  const double z = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * z * z / variance;
}

double inverse_gamma_log_density(double x, double shape, double scale);

/// alpha_j + beta_i + g(a_j, b_i).
double log_odds(std::size_t j, std::size_t i, const ParameterState& state);

/// Conditional-independence log-likelihood over observed cells. Cells are
/// accumulated respondent-major (j outer, i inner) in a single double.
/// Throws NumericError if the result is not finite.
double log_likelihood(const ResponseMatrix& data, const ParameterState& state);

/// Sum of the log prior densities (log-gamma on the log scale). With
/// spike_slab the delta-selected spike or slab component is used in place of
/// the plain log-gamma prior. Latent terms are absent for KernelKind::none.
double log_prior(const ParameterState& state, const Hyperparameters& hyper,
                 bool spike_slab = false);

double log_posterior_unnorm(const ResponseMatrix& data,
                            const ParameterState& state,
                            const Hyperparameters& hyper,
                            bool spike_slab = false);

/// Throws InputError unless the state and data agree in shape.
void check_compatible(const ResponseMatrix& data, const ParameterState& state);

}  // namespace lsirm
