#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lsirm/rng.hpp"
#include "lsirm/types.hpp"

namespace lsirm {

/// Draws a dataset with the same shape and mask as `data`: each observed cell
/// is Bernoulli(logistic(log odds under `draw`)).
ResponseMatrix replicate(const ResponseMatrix& data, const ParameterState& draw, Rng& rng);

/// Proportion of 1s among the observed cells of each item (NaN for an item
/// with no observed cell).
std::vector<double> item_proportions(const ResponseMatrix& data);

struct ItemCheck {
  double observed = 0.0;
  double replicated_mean = 0.0;
  double replicated_sd = 0.0;
  double replicated_q025 = 0.0;
  double replicated_q975 = 0.0;
  /// (replicated mean - observed) / replicated SD.
  double cohen_d = 0.0;
  /// Replicated SD was zero while the means differed; cohen_d is NaN.
  bool undefined = false;
  bool inside_interval = true;
};

struct PpcReport {
  std::size_t n_replications = 0;
  std::vector<ItemCheck> items;
  /// Items with |d| > flag_threshold or an undefined d.
  std::vector<std::size_t> flagged_items;
  double flag_threshold = 0.8;

  /// Share of items whose observed proportion lies in [q025, q975].
  double coverage() const;
};

/// Cohen's d for one item from the replicated proportions; sets `undefined`
/// when the replicated SD is zero and the means differ.
ItemCheck compare_item(double observed, const std::vector<double>& replicated);

/// Replication r uses posterior draw r mod draws.size() and the RNG stream
/// derive_seed(seed, r). Throws InputError when draws is empty.
PpcReport ppc_check(const ResponseMatrix& data, const std::vector<ParameterState>& draws,
                    std::size_t n_replications, std::uint64_t seed,
                    std::size_t threads = 1);

}  // namespace lsirm
