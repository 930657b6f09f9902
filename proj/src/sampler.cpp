#include "lsirm/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "lsirm/error.hpp"
#include "lsirm/model.hpp"
#include "lsirm/selection.hpp"

namespace lsirm {

namespace {

bool metropolis_accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

double clamp_factor(double rate, double target) {
  return std::clamp(rate / target, 0.5, 2.0);
}

}  // namespace

void ProposalScales::validate() const {
  for (double s : {alpha, beta, log_gamma, pos_a, pos_b}) {
    if (!(s > 0) || !std::isfinite(s)) {
      throw InputError("proposal scales must be positive and finite");
    }
  }
}

void ChainSchedule::validate() const {
  if (n_iterations == 0 || thin == 0 || n_chains == 0) {
    throw InputError("iterations, thin and chains must be positive");
  }
  if (n_burnin >= n_iterations) {
    throw InputError("burn-in must be shorter than the total iteration count");
  }
}

void ModelConfig::validate() const {
  if (dimension == 0 && kernel != KernelKind::none) {
    throw InputError("latent dimension must be positive");
  }
  hyper.validate();
  scales.validate();
  if (fixed_gamma) {
    if (kernel != KernelKind::distance) {
      throw InputError("a fixed gamma only applies to the distance kernel");
    }
    if (!(*fixed_gamma > 0) || !std::isfinite(*fixed_gamma)) {
      throw InputError("fixed gamma must be positive; use the 'none' kernel for gamma = 0");
    }
  }
  if (spike_slab && kernel != KernelKind::distance) {
    throw UsageError("spike-and-slab selection requires the distance kernel");
  }
  if (spike_slab && fixed_gamma) {
    throw UsageError("spike-and-slab selection cannot hold gamma fixed");
  }
  if (tuning.enabled && (!(tuning.target_rate > 0 && tuning.target_rate < 1) ||
                         tuning.interval == 0)) {
    throw InputError("tuning needs a target rate in (0, 1) and a positive interval");
  }
}

AcceptanceCounts& AcceptanceCounts::operator+=(const AcceptanceCounts& o) {
  alpha += o.alpha;
  beta += o.beta;
  gamma += o.gamma;
  pos_a += o.pos_a;
  pos_b += o.pos_b;
  return *this;
}

std::uint64_t AcceptanceCounts::total_proposed() const {
  return alpha.proposed + beta.proposed + gamma.proposed + pos_a.proposed + pos_b.proposed;
}

InverseGammaParams sigma2_full_conditional(const Eigen::VectorXd& alpha,
                                           const Hyperparameters& hyper) {
  return {hyper.a_sigma + 0.5 * static_cast<double>(alpha.size()),
          hyper.b_sigma + 0.5 * alpha.squaredNorm()};
}

void gibbs_update_sigma2(ParameterState& state, const Hyperparameters& hyper, Rng& rng) {
  const auto params = sigma2_full_conditional(state.main.alpha, hyper);
  state.sigma2 = rng.inverse_gamma(params.shape, params.scale);
}

ProposalScales tune_scales(const AcceptanceCounts& window, const ProposalScales& current,
                           double target_rate) {
  if (window.total_proposed() == 0) {
    throw UsageError("cannot tune proposal scales: no proposals were recorded");
  }
  if (!(target_rate > 0 && target_rate < 1)) {
    throw InputError("target acceptance rate must lie in (0, 1)");
  }
  auto rescale = [target_rate](double scale, const BlockCounts& c) {
    return c.proposed == 0 ? scale : scale * clamp_factor(c.rate(), target_rate);
  };
  ProposalScales out = current;
  out.alpha = rescale(current.alpha, window.alpha);
  out.beta = rescale(current.beta, window.beta);
  out.log_gamma = rescale(current.log_gamma, window.gamma);
  out.pos_a = rescale(current.pos_a, window.pos_a);
  out.pos_b = rescale(current.pos_b, window.pos_b);
  return out;
}

ProposalScales tune_scales(const ChainOutput& pilot, double target_rate) {
  return tune_scales(pilot.acceptance, pilot.final_scales, target_rate);
}

ParameterState initial_state(const ResponseMatrix& data, const ModelConfig& config, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(data.n_respondents());
  const auto m = static_cast<Eigen::Index>(data.n_items());
  ParameterState s;
  s.main.alpha = Eigen::VectorXd::Zero(n);
  s.main.beta = Eigen::VectorXd::Zero(m);
  s.latent = LatentConfiguration::zeros(data.n_respondents(), data.n_items(), config.dimension);
  if (config.kernel != KernelKind::none) {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < s.latent.respondents.cols(); ++k)
        s.latent.respondents(j, k) = rng.normal();
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index k = 0; k < s.latent.items.cols(); ++k)
        s.latent.items(i, k) = rng.normal();
  }
  s.kernel.kind = config.kernel;
  s.kernel.metric = config.metric;
  s.kernel.gamma = config.kernel == KernelKind::distance
                       ? config.fixed_gamma.value_or(std::exp(config.hyper.mu_gamma))
                       : 0.0;
  s.sigma2 = 1.0;
  s.delta = 1;
  s.omega = 0.5;
  return s;
}

Sampler::Sampler(const ResponseMatrix& data, ModelConfig config, ParameterState initial)
    : data_(data),
      config_(std::move(config)),
      state_(std::move(initial)),
      scales_(config_.scales),
      n_respondents_(data.n_respondents()),
      n_items_(data.n_items()),
      dim_(config_.kernel == KernelKind::none ? 0 : config_.dimension) {
  config_.validate();
  state_.kernel.kind = config_.kernel;
  state_.kernel.metric = config_.metric;
  if (config_.fixed_gamma) state_.kernel.gamma = *config_.fixed_gamma;
  state_.validate();
  check_compatible(data_, state_);
  if (state_.uses_positions() && state_.latent.dimension() != config_.dimension) {
    throw InputError("initial positions do not match the configured dimension");
  }
  raw_.assign(n_respondents_ * n_items_, 0.0);
  mass_.assign(n_respondents_ * n_items_, 0.0);
  scratch_gamma_mass_.assign(n_respondents_ * n_items_, 0.0);
  scratch_raw_.assign(std::max(n_respondents_, n_items_), 0.0);
  scratch_mass_.assign(std::max(n_respondents_, n_items_), 0.0);
  scratch_pos_.assign(std::max<std::size_t>(dim_, 1), 0.0);
  rebuild_cache();
}

void Sampler::set_scales(const ProposalScales& scales) {
  scales.validate();
  scales_ = scales;
}

void Sampler::rebuild_cache() {
  const auto& alpha = state_.main.alpha;
  const auto& beta = state_.main.beta;
  for (std::size_t j = 0; j < n_respondents_; ++j) {
    const double* a = state_.latent.respondents.row(static_cast<Eigen::Index>(j)).data();
    for (std::size_t i = 0; i < n_items_; ++i) {
      double effect = 0.0;
      if (state_.uses_positions()) {
        const double* b = state_.latent.items.row(static_cast<Eigen::Index>(i)).data();
        raw_[j * n_items_ + i] = raw_interaction(a, b, dim_, state_.kernel);
        effect = interaction_effect(raw_[j * n_items_ + i], state_.kernel);
      }
      const double eta = state_.uses_positions()
                             ? alpha(static_cast<Eigen::Index>(j)) +
                                   beta(static_cast<Eigen::Index>(i)) + effect
                             : alpha(static_cast<Eigen::Index>(j)) +
                                   beta(static_cast<Eigen::Index>(i));
      mass_[j * n_items_ + i] = cell_mass(j, i, eta);
    }
  }
}

// Log odds are formed as (alpha + beta) + effect, the same expression as
// log_odds(), so the cached masses equal a fresh evaluation bit for bit.

double Sampler::row_log_lik_delta(std::size_t j, double alpha_new, double* mass_out) const {
  const bool latent = state_.uses_positions();
  double delta = 0.0;
  for (std::size_t i = 0; i < n_items_; ++i) {
    double eta = alpha_new + state_.main.beta(static_cast<Eigen::Index>(i));
    if (latent) eta += interaction_effect(raw(j, i), state_.kernel);
    const double m = cell_mass(j, i, eta);
    if (mass_out != nullptr) mass_out[i] = m;
    delta += m - mass(j, i);
  }
  return delta;
}

double Sampler::col_log_lik_delta(std::size_t i, double beta_new, double* mass_out) const {
  const bool latent = state_.uses_positions();
  double delta = 0.0;
  for (std::size_t j = 0; j < n_respondents_; ++j) {
    double eta = state_.main.alpha(static_cast<Eigen::Index>(j)) + beta_new;
    if (latent) eta += interaction_effect(raw(j, i), state_.kernel);
    const double m = cell_mass(j, i, eta);
    if (mass_out != nullptr) mass_out[j] = m;
    delta += m - mass(j, i);
  }
  return delta;
}

double Sampler::gamma_log_lik_delta(double gamma_new, double* mass_out) const {
  double delta = 0.0;
  for (std::size_t j = 0; j < n_respondents_; ++j) {
    const double alpha = state_.main.alpha(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < n_items_; ++i) {
      const double eta =
          alpha + state_.main.beta(static_cast<Eigen::Index>(i)) + -gamma_new * raw(j, i);
      const double m = cell_mass(j, i, eta);
      if (mass_out != nullptr) mass_out[j * n_items_ + i] = m;
      delta += m - mass(j, i);
    }
  }
  return delta;
}

double Sampler::alpha_log_ratio(std::size_t j, double proposal) const {
  const double current = state_.main.alpha(static_cast<Eigen::Index>(j));
  const double prior = -0.5 * (proposal * proposal - current * current) / state_.sigma2;
  return row_log_lik_delta(j, proposal, nullptr) + prior;
}

double Sampler::beta_log_ratio(std::size_t i, double proposal) const {
  const double current = state_.main.beta(static_cast<Eigen::Index>(i));
  const double prior = -0.5 * (proposal * proposal - current * current) / config_.hyper.tau2_beta;
  return col_log_lik_delta(i, proposal, nullptr) + prior;
}

double Sampler::gamma_prior_log_density(double log_gamma) const {
  const auto& h = config_.hyper;
  if (config_.spike_slab) {
    return state_.delta == 1 ? normal_log_density(log_gamma, h.slab_mean, h.slab_var)
                             : normal_log_density(log_gamma, h.spike_mean, h.spike_var);
  }
  return normal_log_density(log_gamma, h.mu_gamma, h.tau2_gamma);
}

double Sampler::log_gamma_log_ratio(double proposal) const {
  if (state_.kernel.kind != KernelKind::distance) {
    throw UsageError("gamma is only defined for the distance kernel");
  }
  return gamma_log_lik_delta(std::exp(proposal), nullptr) + gamma_prior_log_density(proposal) -
         gamma_prior_log_density(std::log(state_.kernel.gamma));
}

double Sampler::position_a_delta(std::size_t j, const double* proposal, double* raw_out,
                                 double* mass_out) const {
  const double alpha = state_.main.alpha(static_cast<Eigen::Index>(j));
  double delta = 0.0;
  for (std::size_t i = 0; i < n_items_; ++i) {
    const double* b = state_.latent.items.row(static_cast<Eigen::Index>(i)).data();
    const double r_new = raw_interaction(proposal, b, dim_, state_.kernel);
    if (raw_out != nullptr) raw_out[i] = r_new;
    const double eta = alpha + state_.main.beta(static_cast<Eigen::Index>(i)) +
                       interaction_effect(r_new, state_.kernel);
    const double m = cell_mass(j, i, eta);
    if (mass_out != nullptr) mass_out[i] = m;
    delta += m - mass(j, i);
  }
  const double* current = state_.latent.respondents.row(static_cast<Eigen::Index>(j)).data();
  double prior = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    prior -= 0.5 * (proposal[k] * proposal[k] - current[k] * current[k]);
  }
  return delta + prior;
}

double Sampler::position_b_delta(std::size_t i, const double* proposal, double* raw_out,
                                 double* mass_out) const {
  const double beta = state_.main.beta(static_cast<Eigen::Index>(i));
  double delta = 0.0;
  for (std::size_t j = 0; j < n_respondents_; ++j) {
    const double* a = state_.latent.respondents.row(static_cast<Eigen::Index>(j)).data();
    const double r_new = raw_interaction(a, proposal, dim_, state_.kernel);
    if (raw_out != nullptr) raw_out[j] = r_new;
    const double eta = state_.main.alpha(static_cast<Eigen::Index>(j)) + beta +
                       interaction_effect(r_new, state_.kernel);
    const double m = cell_mass(j, i, eta);
    if (mass_out != nullptr) mass_out[j] = m;
    delta += m - mass(j, i);
  }
  const double* current = state_.latent.items.row(static_cast<Eigen::Index>(i)).data();
  double prior = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    prior -= 0.5 * (proposal[k] * proposal[k] - current[k] * current[k]);
  }
  return delta + prior;
}

double Sampler::position_a_log_ratio(std::size_t j, std::span<const double> proposal) const {
  if (!state_.uses_positions()) throw UsageError("kernel has no latent positions");
  if (proposal.size() != dim_) throw InputError("proposal has the wrong dimension");
  return position_a_delta(j, proposal.data(), nullptr, nullptr);
}

double Sampler::position_b_log_ratio(std::size_t i, std::span<const double> proposal) const {
  if (!state_.uses_positions()) throw UsageError("kernel has no latent positions");
  if (proposal.size() != dim_) throw InputError("proposal has the wrong dimension");
  return position_b_delta(i, proposal.data(), nullptr, nullptr);
}

bool Sampler::update_alpha(std::size_t j, Rng& rng) {
  const auto jj = static_cast<Eigen::Index>(j);
  const double current = state_.main.alpha(jj);
  const double proposal = current + scales_.alpha * rng.normal();
  const double prior = -0.5 * (proposal * proposal - current * current) / state_.sigma2;
  const double ratio = row_log_lik_delta(j, proposal, scratch_mass_.data()) + prior;
  if (!metropolis_accept(ratio, rng)) return false;
  state_.main.alpha(jj) = proposal;
  std::copy_n(scratch_mass_.begin(), n_items_,
              mass_.begin() + static_cast<std::ptrdiff_t>(j * n_items_));
  return true;
}

bool Sampler::update_beta(std::size_t i, Rng& rng) {
  const auto ii = static_cast<Eigen::Index>(i);
  const double current = state_.main.beta(ii);
  const double proposal = current + scales_.beta * rng.normal();
  const double prior = -0.5 * (proposal * proposal - current * current) / config_.hyper.tau2_beta;
  const double ratio = col_log_lik_delta(i, proposal, scratch_mass_.data()) + prior;
  if (!metropolis_accept(ratio, rng)) return false;
  state_.main.beta(ii) = proposal;
  for (std::size_t j = 0; j < n_respondents_; ++j) mass_[j * n_items_ + i] = scratch_mass_[j];
  return true;
}

bool Sampler::update_gamma(Rng& rng) {
  if (state_.kernel.kind != KernelKind::distance) {
    throw UsageError("gamma is only defined for the distance kernel");
  }
  const double current = std::log(state_.kernel.gamma);
  const double proposal = current + scales_.log_gamma * rng.normal();
  const double g_new = std::exp(proposal);
  const double ratio = gamma_log_lik_delta(g_new, scratch_gamma_mass_.data()) +
                       gamma_prior_log_density(proposal) - gamma_prior_log_density(current);
  if (!metropolis_accept(ratio, rng)) return false;
  state_.kernel.gamma = g_new;
  mass_.swap(scratch_gamma_mass_);
  return true;
}

bool Sampler::update_position_a(std::size_t j, Rng& rng) {
  if (!state_.uses_positions()) throw UsageError("kernel has no latent positions");
  auto row = state_.latent.respondents.row(static_cast<Eigen::Index>(j));
  for (std::size_t k = 0; k < dim_; ++k) {
    scratch_pos_[k] = row(static_cast<Eigen::Index>(k)) + scales_.pos_a * rng.normal();
  }
  const double ratio =
      position_a_delta(j, scratch_pos_.data(), scratch_raw_.data(), scratch_mass_.data());
  if (!metropolis_accept(ratio, rng)) return false;
  for (std::size_t k = 0; k < dim_; ++k) row(static_cast<Eigen::Index>(k)) = scratch_pos_[k];
  const auto offset = static_cast<std::ptrdiff_t>(j * n_items_);
  std::copy_n(scratch_raw_.begin(), n_items_, raw_.begin() + offset);
  std::copy_n(scratch_mass_.begin(), n_items_, mass_.begin() + offset);
  return true;
}

bool Sampler::update_position_b(std::size_t i, Rng& rng) {
  if (!state_.uses_positions()) throw UsageError("kernel has no latent positions");
  auto row = state_.latent.items.row(static_cast<Eigen::Index>(i));
  for (std::size_t k = 0; k < dim_; ++k) {
    scratch_pos_[k] = row(static_cast<Eigen::Index>(k)) + scales_.pos_b * rng.normal();
  }
  const double ratio =
      position_b_delta(i, scratch_pos_.data(), scratch_raw_.data(), scratch_mass_.data());
  if (!metropolis_accept(ratio, rng)) return false;
  for (std::size_t k = 0; k < dim_; ++k) row(static_cast<Eigen::Index>(k)) = scratch_pos_[k];
  for (std::size_t j = 0; j < n_respondents_; ++j) {
    raw_[j * n_items_ + i] = scratch_raw_[j];
    mass_[j * n_items_ + i] = scratch_mass_[j];
  }
  return true;
}

void Sampler::update_sigma2(Rng& rng) { gibbs_update_sigma2(state_, config_.hyper, rng); }

void Sampler::update_selection(Rng& rng) {
  if (!config_.spike_slab) throw UsageError("delta/omega updates need spike_slab");
  update_delta(state_, config_.hyper, rng);
  update_omega(state_, rng);
}

void Sampler::sweep(Rng& rng, AcceptanceCounts& counts) {
  for (std::size_t j = 0; j < n_respondents_; ++j) counts.alpha.record(update_alpha(j, rng));
  for (std::size_t i = 0; i < n_items_; ++i) counts.beta.record(update_beta(i, rng));
  if (config_.samples_gamma()) counts.gamma.record(update_gamma(rng));
  if (config_.samples_positions()) {
    for (std::size_t j = 0; j < n_respondents_; ++j) counts.pos_a.record(update_position_a(j, rng));
    for (std::size_t i = 0; i < n_items_; ++i) counts.pos_b.record(update_position_b(i, rng));
  }
  update_sigma2(rng);
  if (config_.spike_slab) update_selection(rng);
}

double Sampler::log_posterior() const {
  // Same respondent-major order as log_likelihood().
  double ll = 0.0;
  for (double m : mass_) ll += m;
  if (!std::isfinite(ll)) throw NumericError("log-likelihood is not finite");
  const double value = ll + log_prior(state_, config_.hyper, config_.spike_slab);
  if (!std::isfinite(value)) throw NumericError("log posterior is not finite");
  return value;
}

ChainOutput run_chain(const ResponseMatrix& data, const ModelConfig& config,
                      const ChainSchedule& schedule, ParameterState initial, Rng& rng,
                      std::size_t chain_id) {
  schedule.validate();
  config.validate();
  ChainOutput out;
  out.chain_id = chain_id;
  out.seed_used = rng.seed();

  Sampler sampler(data, config, std::move(initial));
  double start = 0.0;
  try {
    start = sampler.log_posterior();
  } catch (const NumericError& e) {
    throw InitializationError(std::string("chain start: ") + e.what());
  }
  if (!std::isfinite(start)) throw InitializationError("chain start: posterior is not finite");

  const std::size_t kept = schedule.n_kept();
  if (config.record_draws) out.draws.reserve(kept);
  out.log_posterior.reserve(kept);
  out.log_gamma.reserve(kept);
  out.sigma2.reserve(kept);
  if (config.spike_slab) {
    out.delta.reserve(kept);
    out.omega.reserve(kept);
  }

  AcceptanceCounts window;
  const auto& tuning = config.tuning;
  for (std::size_t t = 0; t < schedule.n_iterations; ++t) {
    AcceptanceCounts sweep_counts;
    sampler.sweep(rng, sweep_counts);
    out.acceptance += sweep_counts;

    const std::size_t done = t + 1;
    if (t < schedule.n_burnin) {
      window += sweep_counts;
      if (tuning.enabled && done % tuning.interval == 0 &&
          out.tuning_rounds < tuning.max_rounds && window.total_proposed() > 0) {
        sampler.set_scales(tune_scales(window, sampler.scales(), tuning.target_rate));
        ++out.tuning_rounds;
        window = AcceptanceCounts{};
      }
      continue;
    }
    out.kept_acceptance += sweep_counts;
    if ((done - schedule.n_burnin) % schedule.thin != 0) continue;

    const auto& s = sampler.state();
    if (config.record_draws) out.draws.push_back(s);
    out.log_posterior.push_back(sampler.log_posterior());
    out.log_gamma.push_back(s.uses_gamma() ? std::log(s.kernel.gamma)
                                           : -std::numeric_limits<double>::infinity());
    out.sigma2.push_back(s.sigma2);
    if (config.spike_slab) {
      out.delta.push_back(s.delta);
      out.omega.push_back(s.omega);
    }
  }
  out.final_scales = sampler.scales();
  return out;
}

ChainOutput run_chain(const ResponseMatrix& data, const ModelConfig& config,
                      const ChainSchedule& schedule, std::size_t chain_id) {
  Rng rng(derive_seed(schedule.seed, chain_id));
  ParameterState init = initial_state(data, config, rng);
  return run_chain(data, config, schedule, std::move(init), rng, chain_id);
}

std::vector<ChainOutput> run_chains(const ResponseMatrix& data, const ModelConfig& config,
                                    const ChainSchedule& schedule, std::size_t threads) {
  schedule.validate();
  config.validate();
  const std::size_t n = schedule.n_chains;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);

  std::vector<ChainOutput> out(n);
  if (threads <= 1) {
    for (std::size_t c = 0; c < n; ++c) out[c] = run_chain(data, config, schedule, c);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t c = next++; c < n; c = next++) {
        try {
          out[c] = run_chain(data, config, schedule, c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace lsirm
