#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lsirm/error.hpp"
#include "lsirm/model.hpp"
#include "lsirm/sampler.hpp"
#include "lsirm/simgen.hpp"
#include "stats.hpp"

using namespace lsirm;
using lsirm::testing::mean;
using lsirm::testing::random_responses;
using lsirm::testing::variance;

namespace {

ModelConfig distance_config(std::size_t p = 2) {
  ModelConfig c;
  c.dimension = p;
  c.tuning.enabled = false;
  return c;
}

Sampler prior_only_sampler(const ResponseMatrix& empty, ModelConfig config, std::uint64_t seed) {
  Rng rng(seed);
  return Sampler(empty, config, initial_state(empty, config, rng));
}

}  // namespace

TEST_CASE("sigma2 full conditional parameters") {
  const Hyperparameters hyper;
  const auto a = sigma2_full_conditional((Eigen::VectorXd(2) << 1.0, -1.0).finished(), hyper);
  CHECK(a.shape == 2.0);
  CHECK(a.scale == 2.0);
  const auto b = sigma2_full_conditional(Eigen::VectorXd::Zero(4), hyper);
  CHECK(b.shape == 3.0);
  CHECK(b.scale == 1.0);
}

TEST_CASE("sigma2 Gibbs draws match Inv-Gamma moments") {
  const Hyperparameters hyper;
  ParameterState s;
  s.main.alpha = Eigen::VectorXd::LinSpaced(40, -1.5, 2.0);
  const auto ig = sigma2_full_conditional(s.main.alpha, hyper);
  Rng rng(17);
  std::vector<double> draws;
  for (int k = 0; k < 100000; ++k) {
    gibbs_update_sigma2(s, hyper, rng);
    draws.push_back(s.sigma2);
  }
  const double m = ig.scale / (ig.shape - 1.0);
  const double v = ig.scale * ig.scale / ((ig.shape - 1.0) * (ig.shape - 1.0) * (ig.shape - 2.0));
  CHECK(std::abs(mean(draws) / m - 1.0) < 0.02);
  CHECK(std::abs(variance(draws) / v - 1.0) < 0.02);
}

TEST_CASE("self proposals have zero log ratio") {
  const auto data = random_responses(5, 4, 1);
  const auto config = distance_config();
  Rng rng(2);
  Sampler sampler(data, config, initial_state(data, config, rng));
  const auto& s = sampler.state();
  CHECK(sampler.alpha_log_ratio(2, s.main.alpha(2)) == 0.0);
  CHECK(sampler.beta_log_ratio(1, s.main.beta(1)) == 0.0);
  CHECK(sampler.log_gamma_log_ratio(std::log(s.kernel.gamma)) == 0.0);
  CHECK(sampler.position_a_log_ratio(3, s.latent.respondent(3)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sampler.position_b_log_ratio(0, s.latent.item(0)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("log ratios equal differences of the full log posterior") {
  const auto data = random_responses(6, 5, 3, 0.2);
  const auto config = distance_config();
  Rng rng(4);
  Sampler sampler(data, config, initial_state(data, config, rng));
  const ParameterState base = sampler.state();
  const double lp0 = log_posterior_unnorm(data, base, config.hyper);

  ParameterState s = base;
  s.main.alpha(2) += 0.8;
  CHECK(sampler.alpha_log_ratio(2, s.main.alpha(2)) ==
        doctest::Approx(log_posterior_unnorm(data, s, config.hyper) - lp0).epsilon(1e-10));

  s = base;
  s.main.beta(4) -= 0.6;
  CHECK(sampler.beta_log_ratio(4, s.main.beta(4)) ==
        doctest::Approx(log_posterior_unnorm(data, s, config.hyper) - lp0).epsilon(1e-10));

  s = base;
  s.kernel.gamma *= 1.4;
  CHECK(sampler.log_gamma_log_ratio(std::log(s.kernel.gamma)) ==
        doctest::Approx(log_posterior_unnorm(data, s, config.hyper) - lp0).epsilon(1e-10));

  s = base;
  s.latent.respondents.row(1) << 0.3, -1.2;
  CHECK(sampler.position_a_log_ratio(1, s.latent.respondent(1)) ==
        doctest::Approx(log_posterior_unnorm(data, s, config.hyper) - lp0).epsilon(1e-10));

  s = base;
  s.latent.items.row(3) << -0.5, 0.9;
  CHECK(sampler.position_b_log_ratio(3, s.latent.item(3)) ==
        doctest::Approx(log_posterior_unnorm(data, s, config.hyper) - lp0).epsilon(1e-10));
}

TEST_CASE("sampler cached posterior stays consistent over sweeps") {
  const auto data = random_responses(8, 5, 7, 0.1);
  for (KernelKind kind : {KernelKind::distance, KernelKind::multiplicative, KernelKind::none}) {
    auto config = distance_config();
    config.kernel = kind;
    config.metric = Metric::l1;
    Rng rng(9);
    Sampler sampler(data, config, initial_state(data, config, rng));
    AcceptanceCounts counts;
    for (int t = 0; t < 50; ++t) sampler.sweep(rng, counts);
    CHECK(sampler.log_posterior() == log_posterior_unnorm(data, sampler.state(), config.hyper));
  }
}

TEST_CASE("prior-only alpha block is stationary for N(0, sigma2)") {
  const ResponseMatrix empty(1, 1);
  auto config = distance_config();
  config.kernel = KernelKind::none;
  auto sampler = prior_only_sampler(empty, config, 5);
  Rng rng(6);
  std::vector<double> draws;
  for (int k = 0; k < 50000 * 5; ++k) {
    sampler.update_alpha(0, rng);
    if (k % 5 == 0) draws.push_back(sampler.state().main.alpha(0));
  }
  CHECK(std::abs(mean(draws)) < 0.02);
  CHECK(std::abs(std::sqrt(variance(draws)) - 1.0) < 0.02);
}

TEST_CASE("prior-only beta block is stationary for N(0, tau2)") {
  const ResponseMatrix empty(1, 1);
  auto config = distance_config();
  config.kernel = KernelKind::none;
  config.scales.beta = 4.5;
  auto sampler = prior_only_sampler(empty, config, 7);
  Rng rng(8);
  std::vector<double> draws;
  for (int k = 0; k < 50000 * 5; ++k) {
    sampler.update_beta(0, rng);
    if (k % 5 == 0) draws.push_back(sampler.state().main.beta(0));
  }
  CHECK(std::abs(mean(draws)) < 0.02 * 2.0);
  CHECK(std::abs(std::sqrt(variance(draws)) / 2.0 - 1.0) < 0.02);
}

TEST_CASE("prior-only log gamma block is stationary for N(mu, tau2)") {
  const ResponseMatrix empty(2, 2);
  auto config = distance_config();
  config.scales.log_gamma = 2.4;
  auto sampler = prior_only_sampler(empty, config, 9);
  Rng rng(10);
  std::vector<double> draws;
  for (int k = 0; k < 50000 * 5; ++k) {
    sampler.update_gamma(rng);
    if (k % 5 == 0) draws.push_back(std::log(sampler.state().kernel.gamma));
  }
  CHECK(std::abs(mean(draws) - 0.5) < 0.02);
  CHECK(std::abs(std::sqrt(variance(draws)) - 1.0) < 0.02);
}

TEST_CASE("prior-only position blocks are stationary for N(0, I)") {
  const ResponseMatrix empty(1, 1);
  auto config = distance_config(2);
  config.scales.pos_a = 2.0;
  config.scales.pos_b = 2.0;
  auto sampler = prior_only_sampler(empty, config, 11);
  Rng rng(12);
  std::vector<double> a0, a1, b0;
  for (int k = 0; k < 50000 * 5; ++k) {
    sampler.update_position_a(0, rng);
    sampler.update_position_b(0, rng);
    if (k % 5 == 0) {
      a0.push_back(sampler.state().latent.respondents(0, 0));
      a1.push_back(sampler.state().latent.respondents(0, 1));
      b0.push_back(sampler.state().latent.items(0, 0));
    }
  }
  for (const auto* d : {&a0, &a1, &b0}) {
    CHECK(std::abs(mean(*d)) < 0.02);
    CHECK(std::abs(std::sqrt(variance(*d)) - 1.0) < 0.02);
  }
}

TEST_CASE("one-cell alpha posterior matches quadrature") {
  // y = 1, beta fixed at 0.5, sigma2 = 1, Rasch likelihood.
  ResponseMatrix y(1, 1);
  y.set(0, 0, 1);
  const double beta = 0.5;
  double num = 0.0, den = 0.0;
  for (double a = -10.0; a <= 10.0; a += 1e-4) {
    const double w = std::exp(-0.5 * a * a) * logistic(a + beta);
    num += a * w;
    den += w;
  }
  const double exact = num / den;

  auto config = distance_config();
  config.kernel = KernelKind::none;
  Rng init(1);
  ParameterState s = initial_state(y, config, init);
  s.main.beta(0) = beta;
  Sampler sampler(y, config, s);
  Rng rng(13);
  std::vector<double> draws;
  for (int k = 0; k < 200000; ++k) {
    sampler.update_alpha(0, rng);
    draws.push_back(sampler.state().main.alpha(0));
  }
  CHECK(std::abs(mean(draws) - exact) < 0.02);
}

TEST_CASE("one-cell beta posterior matches quadrature") {
  ResponseMatrix y(1, 1);
  y.set(0, 0, 0);
  const double alpha = -0.3;
  double num = 0.0, den = 0.0;
  for (double b = -20.0; b <= 20.0; b += 1e-4) {
    const double w = std::exp(-0.5 * b * b / 4.0) * (1.0 - logistic(alpha + b));
    num += b * w;
    den += w;
  }
  const double exact = num / den;

  auto config = distance_config();
  config.kernel = KernelKind::none;
  config.scales.beta = 3.0;
  Rng init(1);
  ParameterState s = initial_state(y, config, init);
  s.main.alpha(0) = alpha;
  Sampler sampler(y, config, s);
  Rng rng(14);
  std::vector<double> draws;
  for (int k = 0; k < 200000; ++k) {
    sampler.update_beta(0, rng);
    draws.push_back(sampler.state().main.beta(0));
  }
  CHECK(std::abs(mean(draws) - exact) < 0.02);
}

TEST_CASE("gamma update requires the distance kernel") {
  const auto data = random_responses(3, 3, 1);
  auto config = distance_config();
  config.kernel = KernelKind::multiplicative;
  Rng rng(1);
  Sampler sampler(data, config, initial_state(data, config, rng));
  CHECK_THROWS_AS(sampler.update_gamma(rng), UsageError);
}

TEST_CASE("tuning rule arithmetic") {
  ProposalScales s;
  AcceptanceCounts w;
  w.alpha = {30, 100};
  w.beta = {60, 100};
  w.gamma = {90, 100};
  w.pos_a = {3, 100};
  const auto t = tune_scales(w, s);
  CHECK(t.alpha == doctest::Approx(s.alpha));
  CHECK(t.beta == doctest::Approx(2.0 * s.beta));
  CHECK(t.log_gamma == doctest::Approx(2.0 * s.log_gamma));
  CHECK(t.pos_a == doctest::Approx(0.5 * s.pos_a));
  CHECK(t.pos_b == s.pos_b);
  CHECK_THROWS_AS(tune_scales(AcceptanceCounts{}, s), UsageError);
}

TEST_CASE("run_chain is deterministic and counts every proposal") {
  const auto data = random_responses(10, 6, 21, 0.1);
  auto config = distance_config();
  config.tuning.enabled = true;
  config.tuning.interval = 50;
  ChainSchedule schedule{300, 100, 2, 1, 42};
  const auto a = run_chain(data, config, schedule, 0);
  const auto b = run_chain(data, config, schedule, 0);
  CHECK(a.log_posterior == b.log_posterior);
  CHECK(a.sigma2 == b.sigma2);
  CHECK(a.final_scales == b.final_scales);
  CHECK(a.draws.size() == 100);
  CHECK(a.tuning_rounds == 2);
  CHECK(a.acceptance.alpha.proposed == 300u * 10u);
  CHECK(a.acceptance.beta.proposed == 300u * 6u);
  CHECK(a.acceptance.gamma.proposed == 300u);
  CHECK(a.acceptance.pos_a.proposed == 300u * 10u);
  CHECK(a.acceptance.pos_b.proposed == 300u * 6u);
  CHECK(a.kept_acceptance.alpha.proposed == 200u * 10u);

  const auto other = run_chain(data, config, schedule, 1);
  CHECK(other.log_posterior != a.log_posterior);
}

TEST_CASE("run_chains does not depend on the thread count") {
  const auto data = random_responses(8, 5, 2);
  const auto config = distance_config();
  ChainSchedule schedule{200, 100, 1, 3, 5};
  const auto one = run_chains(data, config, schedule, 1);
  const auto three = run_chains(data, config, schedule, 3);
  REQUIRE(one.size() == 3);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(one[c].chain_id == c);
    CHECK(one[c].log_posterior == three[c].log_posterior);
  }
}

TEST_CASE("fixed gamma and fixed positions are honoured") {
  const auto data = random_responses(6, 4, 3);
  auto config = distance_config();
  config.fixed_gamma = 2.5;
  config.fix_positions = true;
  Rng rng(3);
  const auto init = initial_state(data, config, rng);
  const auto out = run_chain(data, config, ChainSchedule{100, 50, 1, 1, 1}, init, rng);
  CHECK(out.acceptance.gamma.proposed == 0);
  CHECK(out.acceptance.pos_a.proposed == 0);
  for (const auto& d : out.draws) {
    CHECK(d.kernel.gamma == 2.5);
    CHECK(d.latent.respondents == init.latent.respondents);
  }
}

TEST_CASE("non-finite starting posterior is an initialization error") {
  ResponseMatrix y(1, 2);
  y.set(0, 0, 0);
  y.set(0, 1, 0);
  auto config = distance_config();
  config.kernel = KernelKind::none;
  Rng rng(1);
  auto init = initial_state(y, config, rng);
  init.main.alpha(0) = 1e308;
  CHECK_THROWS_AS(run_chain(y, config, ChainSchedule{10, 5, 1, 1, 1}, init, rng), InitializationError);
}

TEST_CASE("invalid schedules are rejected") {
  const auto data = random_responses(3, 3, 1);
  CHECK_THROWS_AS(run_chain(data, distance_config(), ChainSchedule{10, 10, 1, 1, 1}), InputError);
  CHECK_THROWS_AS(run_chain(data, distance_config(), ChainSchedule{10, 5, 0, 1, 1}), InputError);
}

TEST_CASE("tuning on Rasch-generated data brings every block near the target rate") {
  Rng gen(2024);
  const auto sim = generate_rasch(200, 14, gen);
  ModelConfig config;
  ChainSchedule schedule{6000, 5000, 1, 1, 3};
  const auto out = run_chain(sim.data, config, schedule, 0);
  CHECK(out.tuning_rounds == 10);
  const auto& k = out.kept_acceptance;
  for (const BlockCounts* b : {&k.alpha, &k.beta, &k.gamma, &k.pos_a, &k.pos_b}) {
    CHECK(b->rate() >= 0.15);
    CHECK(b->rate() <= 0.5);
  }
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
