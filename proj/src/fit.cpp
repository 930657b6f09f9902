#include "lsirm/fit.hpp"

#include <limits>

#include "lsirm/error.hpp"

namespace lsirm {

ChainAlignment align_chains(const std::vector<std::vector<ParameterState>>& chains,
                            const std::vector<std::vector<double>>& log_posterior) {
  if (chains.size() != log_posterior.size()) {
    throw InputError("need one log-posterior trace per chain");
  }
  ChainAlignment out;
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    if (chains[c].size() != log_posterior[c].size()) {
      throw InputError("log-posterior trace length does not match the draws");
    }
    for (std::size_t d = 0; d < chains[c].size(); ++d) {
      // Strict comparison keeps the earliest draw on ties.
      if (!found || log_posterior[c][d] > best) {
        best = log_posterior[c][d];
        out.reference_chain = c;
        out.reference_draw = d;
        found = true;
      }
    }
  }
  if (!found) throw InputError("no draws to align");

  out.aligned = chains;
  const auto& ref_state = chains[out.reference_chain][out.reference_draw];
  if (!ref_state.uses_positions()) return out;
  const LatentConfiguration reference = ref_state.latent;
  for (auto& chain : out.aligned) {
    for (auto& s : chain) {
      const auto t = procrustes_transform(s.latent, reference);
      out.fallbacks += t.fallback ? 1 : 0;
      s.latent = apply_isometry(s.latent, t);
    }
  }
  return out;
}

FitResult fit(const ResponseMatrix& data, const ModelConfig& config,
              const ChainSchedule& schedule, std::size_t threads) {
  ModelConfig cfg = config;
  cfg.record_draws = true;
  FitResult out;
  out.chains = run_chains(data, cfg, schedule, threads);

  std::vector<std::vector<ParameterState>> draws;
  std::vector<std::vector<double>> log_post;
  AcceptanceCounts acceptance;
  for (const auto& c : out.chains) {
    draws.push_back(c.draws);
    log_post.push_back(c.log_posterior);
    acceptance += c.kept_acceptance;
  }
  auto alignment = align_chains(draws, log_post);
  out.aligned = std::move(alignment.aligned);
  out.reference_chain = alignment.reference_chain;
  out.reference_draw = alignment.reference_draw;
  out.alignment_fallbacks = alignment.fallbacks;
  out.summary = summarize(out.aligned, acceptance);
  return out;
}

}  // namespace lsirm
