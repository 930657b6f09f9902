#pragma once

#include <cstddef>
#include <vector>

#include "lsirm/postproc.hpp"
#include "lsirm/sampler.hpp"

namespace lsirm {

struct FitResult {
  std::vector<ChainOutput> chains;
  /// Draws of each chain after joint Procrustes alignment.
  std::vector<std::vector<ParameterState>> aligned;
  std::size_t reference_chain = 0;
  std::size_t reference_draw = 0;
  std::size_t alignment_fallbacks = 0;
  PosteriorSummary summary;
};

/// Aligns every draw's positions onto the maximum-log-posterior draw across
/// all chains. Main effects, gamma and sigma^2 are copied unchanged.
/// Returns the (chain, draw) index of the reference and the fallback count.
struct ChainAlignment {
  std::vector<std::vector<ParameterState>> aligned;
  std::size_t reference_chain = 0;
  std::size_t reference_draw = 0;
  std::size_t fallbacks = 0;
};

ChainAlignment align_chains(const std::vector<std::vector<ParameterState>>& chains,
                            const std::vector<std::vector<double>>& log_posterior);

/// Runs chains, aligns and summarizes.
FitResult fit(const ResponseMatrix& data, const ModelConfig& config,
              const ChainSchedule& schedule, std::size_t threads = 1);

}  // namespace lsirm
