#include "lsirm/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsirm/error.hpp"
#include "lsirm/model.hpp"
#include "lsirm/postproc.hpp"

namespace lsirm {

double slab_probability(double log_gamma, double omega, const Hyperparameters& hyper) {
  if (omega >= 1.0) return 1.0;
  if (omega <= 0.0) return 0.0;
  const double log_slab =
      std::log(omega) + normal_log_density(log_gamma, hyper.slab_mean, hyper.slab_var);
  const double log_spike =
      std::log1p(-omega) + normal_log_density(log_gamma, hyper.spike_mean, hyper.spike_var);
  // q = 1 / (1 + exp(log_spike - log_slab))
  return logistic(log_slab - log_spike);
}

int update_delta(ParameterState& state, const Hyperparameters& hyper, Rng& rng) {
  const double q = slab_probability(std::log(state.kernel.gamma), state.omega, hyper);
  // Draw a uniform even at q in {0, 1} so the stream position is fixed.
  state.delta = rng.uniform() < q ? 1 : 0;
  return state.delta;
}

double update_omega(ParameterState& state, Rng& rng) {
  const double d = static_cast<double>(state.delta);
  state.omega = rng.beta(1.0 + d, 2.0 - d);
  return state.omega;
}

bool update_gamma_mixture(Sampler& sampler, Rng& rng) {
  if (!sampler.config().spike_slab) {
    throw UsageError("update_gamma_mixture needs a spike-and-slab sampler");
  }
  return sampler.update_gamma(rng);
}

std::string_view to_string(ChosenModel model) {
  return model == ChosenModel::rasch ? "rasch" : "latent_space";
}

ChosenModel choose_model(double inclusion_probability) {
  return inclusion_probability < 0.5 ? ChosenModel::rasch : ChosenModel::latent_space;
}

SelectionResult summarize_selection(const std::vector<ChainOutput>& chains) {
  SelectionResult result;
  std::vector<std::vector<double>> log_gamma_by_chain;
  std::uint64_t included = 0;
  for (const auto& chain : chains) {
    result.acceptance += chain.acceptance;
    std::uint64_t chain_included = 0;
    for (int d : chain.delta) chain_included += static_cast<std::uint64_t>(d);
    included += chain_included;
    result.chain_inclusion.push_back(
        chain.delta.empty() ? 0.0
                            : static_cast<double>(chain_included) /
                                  static_cast<double>(chain.delta.size()));
    result.delta_trace.insert(result.delta_trace.end(), chain.delta.begin(), chain.delta.end());
    result.omega_trace.insert(result.omega_trace.end(), chain.omega.begin(), chain.omega.end());
    result.log_gamma_trace.insert(result.log_gamma_trace.end(), chain.log_gamma.begin(),
                                  chain.log_gamma.end());
    log_gamma_by_chain.push_back(chain.log_gamma);
  }
  if (result.delta_trace.empty()) {
    throw UsageError("selection summary needs chains with recorded delta draws");
  }
  result.inclusion_probability =
      static_cast<double>(included) / static_cast<double>(result.delta_trace.size());
  result.chosen_model = choose_model(result.inclusion_probability);
  result.gamma_median = std::exp(quantile(result.log_gamma_trace, 0.5));

  if (chains.size() >= 2 && log_gamma_by_chain.front().size() >= 2) {
    const double psrf = gelman_rubin(log_gamma_by_chain);
    result.psrf_log_gamma = psrf;
    if (!(psrf <= 1.2)) {
      result.warnings.push_back("possible non-convergence: PSRF of log gamma is " +
                                std::to_string(psrf) + " (> 1.2)");
    }
  }
  return result;
}

SelectionResult run_selection(const ResponseMatrix& data, const ModelConfig& config,
                              const ChainSchedule& schedule, std::size_t threads) {
  if (config.kernel != KernelKind::distance) {
    throw UsageError("model selection requires the distance kernel");
  }
  ModelConfig cfg = config;
  cfg.spike_slab = true;
  cfg.fixed_gamma.reset();
  cfg.record_draws = false;
  return summarize_selection(run_chains(data, cfg, schedule, threads));
}

}  // namespace lsirm
