#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lsirm/model.hpp"
#include "lsirm/rng.hpp"
#include "lsirm/types.hpp"

namespace lsirm {

/// Standard deviations of the Gaussian random-walk proposals. The gamma scale
/// applies to log gamma.
struct ProposalScales {
  double alpha = 2.2;
  double beta = 0.5;
  double log_gamma = 0.1;
  double pos_a = 1.7;
  double pos_b = 0.4;

  void validate() const;
  bool operator==(const ProposalScales&) const = default;
};

struct ChainSchedule {
  std::size_t n_iterations = 20000;
  std::size_t n_burnin = 10000;
  std::size_t thin = 1;
  std::size_t n_chains = 3;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t n_kept() const { return (n_iterations - n_burnin) / thin; }
};

/// Burn-in proposal tuning. Each round rescales every proposal SD by
/// clamp(rate / target, 0.5, 2); rounds stop at burn-in's end.
struct TuningOptions {
  bool enabled = true;
  double target_rate = 0.3;
  std::size_t interval = 500;
  std::size_t max_rounds = 10;
};

struct ModelConfig {
  std::size_t dimension = 2;
  KernelKind kernel = KernelKind::distance;
  Metric metric = Metric::l2;
  Hyperparameters hyper;
  ProposalScales scales;
  TuningOptions tuning;
  /// Holds gamma at this value (must be > 0) and skips its update.
  std::optional<double> fixed_gamma;
  /// Keeps the initial positions; skips both position blocks.
  bool fix_positions = false;
  /// Spike-and-slab prior on log gamma with delta/omega updates.
  bool spike_slab = false;
  /// Store full ParameterState snapshots; scalar traces are always kept.
  bool record_draws = true;

  void validate() const;
  bool samples_gamma() const { return kernel == KernelKind::distance && !fixed_gamma; }
  bool samples_positions() const { return kernel != KernelKind::none && !fix_positions; }
};

struct BlockCounts {
  std::uint64_t accepted = 0;
  std::uint64_t proposed = 0;

  void record(bool accept) {
    ++proposed;
    accepted += accept ? 1 : 0;
  }
  /// Accepted / proposed; 0 when nothing was proposed.
  double rate() const {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
  BlockCounts& operator+=(const BlockCounts& o) {
    accepted += o.accepted;
    proposed += o.proposed;
    return *this;
  }
};

struct AcceptanceCounts {
  BlockCounts alpha, beta, gamma, pos_a, pos_b;

  AcceptanceCounts& operator+=(const AcceptanceCounts& o);
  std::uint64_t total_proposed() const;
};

struct ChainOutput {
  std::size_t chain_id = 0;
  std::uint64_t seed_used = 0;
  /// Post-burn-in thinned snapshots (empty unless record_draws).
  std::vector<ParameterState> draws;
  /// Per kept draw.
  std::vector<double> log_posterior;
  std::vector<double> log_gamma;
  std::vector<double> sigma2;
  std::vector<int> delta;
  std::vector<double> omega;
  /// Over every sweep, burn-in included.
  AcceptanceCounts acceptance;
  /// Over post-burn-in sweeps only.
  AcceptanceCounts kept_acceptance;
  ProposalScales final_scales;
  std::size_t tuning_rounds = 0;
};

struct InverseGammaParams {
  double shape;
  double scale;
};

/// Full conditional of sigma^2: Inv-Gamma(a + N/2, b + sum(alpha^2)/2).
InverseGammaParams sigma2_full_conditional(const Eigen::VectorXd& alpha,
                                           const Hyperparameters& hyper);

/// Gibbs step for sigma^2.
void gibbs_update_sigma2(ParameterState& state, const Hyperparameters& hyper, Rng& rng);

/// Rescales each block whose window saw proposals by clamp(rate/target, 0.5, 2).
/// Blocks without proposals keep their scale; throws UsageError if no block
/// recorded any proposal.
ProposalScales tune_scales(const AcceptanceCounts& window,
                           const ProposalScales& current, double target_rate = 0.3);
ProposalScales tune_scales(const ChainOutput& pilot, double target_rate = 0.3);

/// Starting point: alpha = beta = 0, positions from their N(0, I) prior,
/// gamma = exp(mu_gamma) (or the fixed value), sigma^2 = 1, delta = 1,
/// omega = 0.5.
ParameterState initial_state(const ResponseMatrix& data, const ModelConfig& config, Rng& rng);

/// Metropolis-within-Gibbs sampler over one chain. Caches the raw
/// respondent-item interactions and the per-cell Bernoulli log-masses so each
/// proposal only evaluates the cells it changes.
class Sampler {
 public:
  Sampler(const ResponseMatrix& data, ModelConfig config, ParameterState initial);

  const ParameterState& state() const { return state_; }
  const ModelConfig& config() const { return config_; }
  const ProposalScales& scales() const { return scales_; }
  void set_scales(const ProposalScales& scales);

  /// Log Metropolis ratios for a given proposal (log target difference).
  double alpha_log_ratio(std::size_t j, double proposal) const;
  double beta_log_ratio(std::size_t i, double proposal) const;
  double log_gamma_log_ratio(double proposal) const;
  double position_a_log_ratio(std::size_t j, std::span<const double> proposal) const;
  double position_b_log_ratio(std::size_t i, std::span<const double> proposal) const;

  /// Each update proposes once and returns whether the proposal was accepted.
  bool update_alpha(std::size_t j, Rng& rng);
  bool update_beta(std::size_t i, Rng& rng);
  /// Random walk on log gamma. Throws UsageError unless the kernel is
  /// KernelKind::distance. Uses the delta-selected component under spike_slab.
  bool update_gamma(Rng& rng);
  bool update_position_a(std::size_t j, Rng& rng);
  bool update_position_b(std::size_t i, Rng& rng);
  void update_sigma2(Rng& rng);
  /// delta then omega; spike_slab runs only.
  void update_selection(Rng& rng);

  /// One full sweep in order: every alpha_j, every beta_i, gamma, every a_j,
  /// every b_i, sigma^2, then delta and omega when spike_slab.
  void sweep(Rng& rng, AcceptanceCounts& counts);

  double log_posterior() const;

 private:
  // Each *_delta writes the proposed cells' log-masses to mass_out when given.
  double row_log_lik_delta(std::size_t j, double alpha_new, double* mass_out) const;
  double col_log_lik_delta(std::size_t i, double beta_new, double* mass_out) const;
  double gamma_log_lik_delta(double gamma_new, double* mass_out) const;
  double position_a_delta(std::size_t j, const double* proposal, double* raw_out,
                          double* mass_out) const;
  double position_b_delta(std::size_t i, const double* proposal, double* raw_out,
                          double* mass_out) const;
  double gamma_prior_log_density(double log_gamma) const;
  double raw(std::size_t j, std::size_t i) const { return raw_[j * n_items_ + i]; }
  double mass(std::size_t j, std::size_t i) const { return mass_[j * n_items_ + i]; }
  double cell_mass(std::size_t j, std::size_t i, double eta) const {
    return data_.observed(j, i) ? bernoulli_log_mass(data_.value(j, i), eta) : 0.0;
  }
  void rebuild_cache();

  const ResponseMatrix& data_;
  ModelConfig config_;
  ParameterState state_;
  ProposalScales scales_;
  std::size_t n_respondents_;
  std::size_t n_items_;
  std::size_t dim_;
  std::vector<double> raw_;
  std::vector<double> mass_;
  std::vector<double> scratch_raw_;
  std::vector<double> scratch_mass_;
  std::vector<double> scratch_gamma_mass_;
  std::vector<double> scratch_pos_;
};

/// Runs one chain from initial_state() with the RNG stream
/// derive_seed(schedule.seed, chain_id). Throws InitializationError if the
/// starting posterior is not finite.
ChainOutput run_chain(const ResponseMatrix& data, const ModelConfig& config,
                      const ChainSchedule& schedule, std::size_t chain_id = 0);

/// As above with an explicit starting state and RNG.
ChainOutput run_chain(const ResponseMatrix& data, const ModelConfig& config,
                      const ChainSchedule& schedule, ParameterState initial,
                      Rng& rng, std::size_t chain_id = 0);

/// Runs schedule.n_chains independent chains on up to `threads` workers
/// (0 = hardware concurrency). Output is ordered by chain id and does not
/// depend on the thread count.
std::vector<ChainOutput> run_chains(const ResponseMatrix& data, const ModelConfig& config,
                                    const ChainSchedule& schedule, std::size_t threads = 1);

}  // namespace lsirm
