#include "lsirm/simgen.hpp"

#include <cmath>
#include <string>

#include "lsirm/error.hpp"
#include "lsirm/model.hpp"

namespace lsirm {

namespace {

ParameterState draw_main_effects(std::size_t n, std::size_t m, Rng& rng, NormalSpec alpha,
                                 NormalSpec beta) {
  if (!(alpha.sd >= 0) || !(beta.sd >= 0)) {
    throw InputError("generator standard deviations must be nonnegative");
  }
  ParameterState s;
  s.main.alpha.resize(static_cast<Eigen::Index>(n));
  s.main.beta.resize(static_cast<Eigen::Index>(m));
  for (auto& a : s.main.alpha) a = rng.normal(alpha.mean, alpha.sd);
  for (auto& b : s.main.beta) b = rng.normal(beta.mean, beta.sd);
  s.kernel = InteractionKernel::rasch();
  s.latent = LatentConfiguration::zeros(n, m, 1);
  s.sigma2 = alpha.sd * alpha.sd;
  return s;
}

ResponseMatrix draw_cells(const Eigen::MatrixXd& logits, Rng& rng) {
  ResponseMatrix out(static_cast<std::size_t>(logits.rows()),
                     static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index j = 0; j < logits.rows(); ++j) {
    for (Eigen::Index i = 0; i < logits.cols(); ++i) {
      out.set(static_cast<std::size_t>(j), static_cast<std::size_t>(i),
              rng.bernoulli(logistic(logits(j, i))) ? 1 : 0);
    }
  }
  return out;
}

Eigen::MatrixXd state_logits(const ParameterState& s) {
  Eigen::MatrixXd out(s.main.alpha.size(), s.main.beta.size());
  for (Eigen::Index j = 0; j < out.rows(); ++j)
    for (Eigen::Index i = 0; i < out.cols(); ++i)
      out(j, i) = log_odds(static_cast<std::size_t>(j), static_cast<std::size_t>(i), s);
  return out;
}

void check_sizes(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw InputError("need at least one respondent and one item");
}

}  // namespace

Eigen::MatrixXd cell_probabilities(const ParameterState& state) {
  return state_logits(state).unaryExpr([](double eta) { return logistic(eta); });
}

SimulatedData generate_rasch(std::size_t n_respondents, std::size_t n_items, Rng& rng,
                             NormalSpec alpha, NormalSpec beta) {
  check_sizes(n_respondents, n_items);
  auto state = draw_main_effects(n_respondents, n_items, rng, alpha, beta);
  SimulatedData out{draw_cells(state_logits(state), rng), {}};
  out.truth.scenario = "rasch";
  out.truth.parameters = std::move(state);
  return out;
}

std::vector<DependenceBlock> default_dependence_blocks(std::size_t n_respondents,
                                                       std::size_t n_items) {
  const std::size_t hn = n_respondents / 2;
  const std::size_t hm = n_items / 2;
  return {{0, hn, 0, hm}, {n_respondents - hn, n_respondents, n_items - hm, n_items}};
}

SimulatedData generate_local_dependence(std::size_t n_respondents, std::size_t n_items,
                                        const std::vector<DependenceBlock>& blocks,
                                        double boost, Rng& rng, NormalSpec alpha,
                                        NormalSpec beta) {
  check_sizes(n_respondents, n_items);
  if (!std::isfinite(boost)) throw InputError("boost must be finite");
  std::vector<int> owner(n_respondents * n_items, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    if (blk.respondent_begin >= blk.respondent_end || blk.item_begin >= blk.item_end ||
        blk.respondent_end > n_respondents || blk.item_end > n_items) {
      throw InputError("dependence block " + std::to_string(b + 1) +
                       " is empty or out of range");
    }
    for (std::size_t j = blk.respondent_begin; j < blk.respondent_end; ++j) {
      for (std::size_t i = blk.item_begin; i < blk.item_end; ++i) {
        if (owner[j * n_items + i] >= 0) {
          throw InputError("dependence blocks " + std::to_string(owner[j * n_items + i] + 1) +
                           " and " + std::to_string(b + 1) + " overlap");
        }
        owner[j * n_items + i] = static_cast<int>(b);
      }
    }
  }
  auto state = draw_main_effects(n_respondents, n_items, rng, alpha, beta);
  Eigen::MatrixXd logits = state_logits(state);
  for (std::size_t j = 0; j < n_respondents; ++j)
    for (std::size_t i = 0; i < n_items; ++i)
      if (owner[j * n_items + i] >= 0)
        logits(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) += boost;

  SimulatedData out{draw_cells(logits, rng), {}};
  out.truth.scenario = "local_dependence";
  out.truth.parameters = std::move(state);
  out.truth.blocks = blocks;
  out.truth.boost = boost;
  return out;
}

SimulatedData generate_two_cluster(std::size_t n_respondents, std::size_t n_items,
                                   std::size_t n_random, Rng& rng) {
  check_sizes(n_respondents, n_items);
  if (n_random > n_respondents) {
    throw InputError("more random respondents than respondents");
  }
  const std::size_t patterned = n_respondents - n_random;
  const std::size_t first_group = (patterned + 1) / 2;
  const std::size_t first_items = (n_items + 1) / 2;
  ResponseMatrix data(n_respondents, n_items);
  for (std::size_t j = 0; j < n_respondents; ++j) {
    for (std::size_t i = 0; i < n_items; ++i) {
      int y;
      if (j >= patterned) {
        y = rng.bernoulli(0.5) ? 1 : 0;
      } else if (j < first_group) {
        y = i < first_items ? 1 : 0;
      } else {
        y = i < first_items ? 0 : 1;
      }
      data.set(j, i, y);
    }
  }
  SimulatedData out{std::move(data), {}};
  out.truth.scenario = n_random > 0 ? "two_cluster_noisy" : "two_cluster";
  out.truth.n_random = n_random;
  return out;
}

SimulatedData generate_lsirm(std::size_t n_respondents, std::size_t n_items, double gamma,
                             std::size_t dimension, Rng& rng, NormalSpec alpha,
                             NormalSpec beta) {
  check_sizes(n_respondents, n_items);
  if (!(gamma >= 0) || !std::isfinite(gamma)) throw InputError("gamma must be nonnegative");
  if (dimension == 0) throw InputError("latent dimension must be positive");
  auto state = draw_main_effects(n_respondents, n_items, rng, alpha, beta);
  state.latent = LatentConfiguration::zeros(n_respondents, n_items, dimension);
  for (Eigen::Index j = 0; j < state.latent.respondents.rows(); ++j)
    for (Eigen::Index k = 0; k < state.latent.respondents.cols(); ++k)
      state.latent.respondents(j, k) = rng.normal();
  for (Eigen::Index i = 0; i < state.latent.items.rows(); ++i)
    for (Eigen::Index k = 0; k < state.latent.items.cols(); ++k)
      state.latent.items(i, k) = rng.normal();
  state.kernel = {KernelKind::distance, Metric::l2, gamma};

  SimulatedData out{draw_cells(state_logits(state), rng), {}};
  out.truth.scenario = "lsirm";
  out.truth.parameters = std::move(state);
  return out;
}

}  // namespace lsirm
