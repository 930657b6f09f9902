#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsirm/rng.hpp"
#include "lsirm/sampler.hpp"
#include "lsirm/types.hpp"

namespace lsirm {

/// P(delta = 1 | log gamma, omega): omega phi_slab / (omega phi_slab +
/// (1 - omega) phi_spike), evaluated in log space.
double slab_probability(double log_gamma, double omega, const Hyperparameters& hyper);

/// Draws delta from its full conditional given the current log gamma.
int update_delta(ParameterState& state, const Hyperparameters& hyper, Rng& rng);

/// Draws omega ~ Beta(1 + delta, 2 - delta) (uniform prior on omega).
double update_omega(ParameterState& state, Rng& rng);

/// Log-gamma random walk under the delta-selected prior component. The
/// sampler must be configured with spike_slab; throws UsageError otherwise.
bool update_gamma_mixture(Sampler& sampler, Rng& rng);

enum class ChosenModel { rasch, latent_space };
std::string_view to_string(ChosenModel model);

/// Rasch only when the inclusion probability is strictly below 0.5.
ChosenModel choose_model(double inclusion_probability);

struct SelectionResult {
  double inclusion_probability = 0.0;
  ChosenModel chosen_model = ChosenModel::rasch;
  /// Kept draws of every chain, concatenated in chain order.
  std::vector<int> delta_trace;
  std::vector<double> omega_trace;
  std::vector<double> log_gamma_trace;
  std::vector<double> chain_inclusion;
  /// Gelman-Rubin on log gamma; present with two or more chains.
  std::optional<double> psrf_log_gamma;
  double gamma_median = 0.0;
  AcceptanceCounts acceptance;
  std::vector<std::string> warnings;
};

/// Spike-and-slab sampler run. Kernel must be KernelKind::distance
/// (UsageError otherwise). A PSRF above 1.2 on log gamma adds a warning.
SelectionResult run_selection(const ResponseMatrix& data, const ModelConfig& config,
                              const ChainSchedule& schedule, std::size_t threads = 1);

/// Reduces finished chains to a SelectionResult.
SelectionResult summarize_selection(const std::vector<ChainOutput>& chains);

}  // namespace lsirm
