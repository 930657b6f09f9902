#include "lsirm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lsirm/error.hpp"

namespace lsirm {

double distance(std::span<const double> a, std::span<const double> b,
                Metric metric) {
  if (a.size() != b.size()) {
    throw InputError("distance: dimension mismatch (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw InputError("distance: vectors must be non-empty");
  return distance_unchecked(a.data(), b.data(), a.size(), metric);
}

double inverse_gamma_log_density(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - scale / x;
}

void check_compatible(const ResponseMatrix& data, const ParameterState& state) {
  if (data.n_respondents() != state.n_respondents() ||
      data.n_items() != state.n_items()) {
    throw InputError("state is " + std::to_string(state.n_respondents()) + "x" +
                     std::to_string(state.n_items()) + " but data is " +
                     std::to_string(data.n_respondents()) + "x" +
                     std::to_string(data.n_items()));
  }
  if (state.uses_positions() &&
      (static_cast<std::size_t>(state.latent.respondents.rows()) !=
           data.n_respondents() ||
       static_cast<std::size_t>(state.latent.items.rows()) != data.n_items())) {
    throw InputError("latent positions do not match the data shape");
  }
}

double log_odds(std::size_t j, std::size_t i, const ParameterState& state) {
  const auto jj = static_cast<Eigen::Index>(j);
  const auto ii = static_cast<Eigen::Index>(i);
  double eta = state.main.alpha(jj) + state.main.beta(ii);
  if (state.uses_positions()) {
    const double raw =
        raw_interaction(state.latent.respondents.row(jj).data(),
                        state.latent.items.row(ii).data(),
                        state.latent.dimension(), state.kernel);
    eta += interaction_effect(raw, state.kernel);
  }
  return eta;
}

double log_likelihood(const ResponseMatrix& data, const ParameterState& state) {
  check_compatible(data, state);
  double total = 0.0;
  for (std::size_t j = 0; j < data.n_respondents(); ++j) {
    for (std::size_t i = 0; i < data.n_items(); ++i) {
      if (!data.observed(j, i)) continue;
      total += bernoulli_log_mass(data.value(j, i), log_odds(j, i, state));
    }
  }
  if (!std::isfinite(total)) {
    throw NumericError("log-likelihood is not finite");
  }
  return total;
}

double log_prior(const ParameterState& state, const Hyperparameters& hyper,
                 bool spike_slab) {
  if (!(state.sigma2 > 0)) throw InputError("sigma2 must be positive");
  double total = 0.0;
  for (Eigen::Index j = 0; j < state.main.alpha.size(); ++j) {
    total += normal_log_density(state.main.alpha(j), 0.0, state.sigma2);
  }
  for (Eigen::Index i = 0; i < state.main.beta.size(); ++i) {
    total += normal_log_density(state.main.beta(i), 0.0, hyper.tau2_beta);
  }
  total += inverse_gamma_log_density(state.sigma2, hyper.a_sigma, hyper.b_sigma);

  if (state.uses_gamma()) {
    const double log_gamma = std::log(state.kernel.gamma);
    if (spike_slab) {
      total += state.delta == 1
                   ? normal_log_density(log_gamma, hyper.slab_mean, hyper.slab_var)
                   : normal_log_density(log_gamma, hyper.spike_mean, hyper.spike_var);
    } else {
      total += normal_log_density(log_gamma, hyper.mu_gamma, hyper.tau2_gamma);
    }
  }
  if (state.uses_positions()) {
    const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi);
    const auto p = static_cast<double>(state.latent.dimension());
    const auto& a = state.latent.respondents;
    const auto& b = state.latent.items;
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
      total += p * log_norm - 0.5 * a.row(j).squaredNorm();
    }
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      total += p * log_norm - 0.5 * b.row(i).squaredNorm();
    }
  }
  return total;
}

double log_posterior_unnorm(const ResponseMatrix& data,
                            const ParameterState& state,
                            const Hyperparameters& hyper, bool spike_slab) {
  const double value = log_likelihood(data, state) + log_prior(state, hyper, spike_slab);
  if (!std::isfinite(value)) throw NumericError("log posterior is not finite");
  return value;
}

}  // namespace lsirm
