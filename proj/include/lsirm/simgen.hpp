#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lsirm/rng.hpp"
#include "lsirm/types.hpp"

namespace lsirm {

struct NormalSpec {
  double mean = 0.0;
  double sd = 1.0;
};

/// Half-open index ranges [begin, end) of respondents and items.
struct DependenceBlock {
  std::size_t respondent_begin = 0, respondent_end = 0;
  std::size_t item_begin = 0, item_end = 0;

  bool operator==(const DependenceBlock&) const = default;
};

/// What generated a dataset. `parameters` holds the planted state for
/// model-based scenarios; the two-cluster pattern has none.
struct Truth {
  std::string scenario;
  std::optional<ParameterState> parameters;
  std::vector<DependenceBlock> blocks;
  double boost = 0.0;
  std::size_t n_random = 0;
};

struct SimulatedData {
  ResponseMatrix data;
  Truth truth;
};

/// Rasch responses: alpha_j ~ N(alpha), beta_i ~ N(beta), cells
/// Bernoulli(logistic(alpha_j + beta_i)).
SimulatedData generate_rasch(std::size_t n_respondents, std::size_t n_items, Rng& rng,
                             NormalSpec alpha = {}, NormalSpec beta = {});

/// First half of respondents x first half of items and second half x second
/// half, as in the standard two-block local dependence scenario.
std::vector<DependenceBlock> default_dependence_blocks(std::size_t n_respondents,
                                                       std::size_t n_items);

/// Rasch baseline plus `boost` added to the log odds of every cell inside a
/// block. Throws InputError for empty, out-of-range or overlapping blocks.
SimulatedData generate_local_dependence(std::size_t n_respondents, std::size_t n_items,
                                        const std::vector<DependenceBlock>& blocks,
                                        double boost, Rng& rng, NormalSpec alpha = {},
                                        NormalSpec beta = {});

/// Complementary block pattern: of the first N - n_random respondents, the
/// first half answer only the first half of the items correctly and the rest
/// only the second half; the last n_random respondents answer at random.
SimulatedData generate_two_cluster(std::size_t n_respondents, std::size_t n_items,
                                   std::size_t n_random, Rng& rng);

/// Latent space responses with l2 distance: positions ~ N(0, I_p), main
/// effects from the given normals, cells from the full log odds.
SimulatedData generate_lsirm(std::size_t n_respondents, std::size_t n_items, double gamma,
                             std::size_t dimension, Rng& rng, NormalSpec alpha = {},
                             NormalSpec beta = {});

/// Cell success probabilities implied by a state (N x I).
Eigen::MatrixXd cell_probabilities(const ParameterState& state);

}  // namespace lsirm
