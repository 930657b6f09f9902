#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lsirm/error.hpp"
#include "lsirm/model.hpp"
#include "lsirm/simgen.hpp"
#include "stats.hpp"

using namespace lsirm;

namespace {

double overall_mean(const ResponseMatrix& y) {
  double total = 0.0;
  for (std::size_t j = 0; j < y.n_respondents(); ++j)
    for (std::size_t i = 0; i < y.n_items(); ++i) total += y.value(j, i);
  return total / static_cast<double>(y.n_respondents() * y.n_items());
}

// E[logistic(X)] for X ~ N(mean, var) by trapezoidal quadrature.
double logistic_normal_mean(double mean, double var) {
  const double sd = std::sqrt(var);
  double num = 0.0, den = 0.0;
  for (double z = -12.0; z <= 12.0; z += 1e-3) {
    const double w = std::exp(-0.5 * z * z);
    num += w * logistic(mean + sd * z);
    den += w;
  }
  return num / den;
}

double log_odds_ratio(const ResponseMatrix& y, std::size_t a, std::size_t b) {
  double n11 = 0.5, n10 = 0.5, n01 = 0.5, n00 = 0.5;
  for (std::size_t j = 0; j < y.n_respondents(); ++j) {
    const int u = y.value(j, a), v = y.value(j, b);
    (u ? (v ? n11 : n10) : (v ? n01 : n00)) += 1.0;
  }
  return std::log(n11 * n00 / (n10 * n01));
}

}  // namespace

TEST_CASE("Rasch generator with zero main effects") {
  Rng rng(1);
  const auto sim = generate_rasch(200, 14, rng, {0.0, 0.0}, {0.0, 0.0});
  CHECK(sim.data.n_respondents() == 200);
  CHECK(sim.data.n_items() == 14);
  CHECK(std::abs(overall_mean(sim.data) - 0.5) < 0.03);
  CHECK(sim.truth.scenario == "rasch");
  CHECK(sim.truth.parameters->kernel.kind == KernelKind::none);
}

TEST_CASE("Rasch cell means match the logistic-Normal integral") {
  Rng rng(2);
  const NormalSpec alpha{0.5, 1.0}, beta{-0.2, 0.8};
  double total = 0.0;
  const int reps = 50;
  for (int r = 0; r < reps; ++r) total += overall_mean(generate_rasch(200, 14, rng, alpha, beta).data);
  const double expected = logistic_normal_mean(0.3, 1.0 + 0.64);
  CHECK(std::abs(total / reps - expected) < 0.02);
}

TEST_CASE("generators are deterministic given the seed") {
  Rng a(3), b(3);
  CHECK(generate_lsirm(30, 5, 1.7, 2, a).data == generate_lsirm(30, 5, 1.7, 2, b).data);
  Rng c(4), d(4);
  CHECK(generate_two_cluster(20, 6, 5, c).data == generate_two_cluster(20, 6, 5, d).data);
}

TEST_CASE("default dependence blocks split both halves") {
  const auto blocks = default_dependence_blocks(200, 14);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0] == DependenceBlock{0, 100, 0, 7});
  CHECK(blocks[1] == DependenceBlock{100, 200, 7, 14});
}

TEST_CASE("zero boost reproduces the Rasch generator") {
  Rng a(5), b(5);
  const auto ld = generate_local_dependence(200, 14, default_dependence_blocks(200, 14), 0.0, a);
  const auto rasch = generate_rasch(200, 14, b);
  CHECK(ld.data == rasch.data);
  CHECK(cell_probabilities(*ld.truth.parameters) == cell_probabilities(*rasch.truth.parameters));
}

TEST_CASE("dependence blocks are validated") {
  Rng rng(6);
  CHECK_THROWS_AS(generate_local_dependence(10, 4, {{0, 6, 0, 2}, {5, 10, 1, 3}}, 2.0, rng),
                  InputError);
  CHECK_THROWS_AS(generate_local_dependence(10, 4, {{0, 0, 0, 2}}, 2.0, rng), InputError);
  CHECK_THROWS_AS(generate_local_dependence(10, 4, {{0, 11, 0, 2}}, 2.0, rng), InputError);
  CHECK_NOTHROW(generate_local_dependence(10, 4, {{0, 5, 0, 2}, {5, 10, 0, 2}}, 2.0, rng));
}

TEST_CASE("within-block item pairs are more associated than cross-block pairs") {
  Rng rng(7);
  double within = 0.0, cross = 0.0;
  int n_within = 0, n_cross = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto sim = generate_local_dependence(200, 14, default_dependence_blocks(200, 14), 2.0, rng);
    for (std::size_t a = 0; a < 14; ++a) {
      for (std::size_t b = a + 1; b < 14; ++b) {
        const double lor = log_odds_ratio(sim.data, a, b);
        if ((a < 7) == (b < 7)) {
          within += lor;
          ++n_within;
        } else {
          cross += lor;
          ++n_cross;
        }
      }
    }
  }
  CHECK(within / n_within > cross / n_cross);
}

TEST_CASE("two-cluster pattern matches the four-respondent table") {
  Rng rng(8);
  const auto sim = generate_two_cluster(4, 6, 0, rng);
  Eigen::MatrixXi expected(4, 6);
  expected << 1, 1, 1, 0, 0, 0,
              1, 1, 1, 0, 0, 0,
              0, 0, 0, 1, 1, 1,
              0, 0, 0, 1, 1, 1;
  CHECK(sim.data.to_dense() == expected);
  CHECK(sim.truth.scenario == "two_cluster");
  CHECK_FALSE(sim.truth.parameters.has_value());
}

TEST_CASE("two-cluster with every respondent random") {
  Rng rng(9);
  const auto sim = generate_two_cluster(400, 6, 400, rng);
  CHECK(std::abs(overall_mean(sim.data) - 0.5) < 0.03);
  CHECK_THROWS_AS(generate_two_cluster(4, 6, 5, rng), InputError);
}

TEST_CASE("noisy two-cluster layout") {
  Rng rng(10);
  const auto sim = generate_two_cluster(100, 6, 20, rng);
  CHECK(sim.truth.scenario == "two_cluster_noisy");
  CHECK(sim.truth.n_random == 20);
  for (std::size_t j = 0; j < 80; ++j) {
    for (std::size_t i = 0; i < 6; ++i) {
      const int expected = (j < 40) == (i < 3) ? 1 : 0;
      CHECK(sim.data.value(j, i) == expected);
    }
  }
}

TEST_CASE("latent space generator with zero gamma has Rasch probabilities") {
  Rng rng(11);
  const auto sim = generate_lsirm(50, 8, 0.0, 2, rng);
  const auto& t = *sim.truth.parameters;
  const auto p = cell_probabilities(t);
  for (Eigen::Index j = 0; j < 50; ++j)
    for (Eigen::Index i = 0; i < 8; ++i) CHECK(p(j, i) == logistic(t.main.alpha(j) + t.main.beta(i)));
}

TEST_CASE("latent space cells agree with the recorded truth") {
  Rng rng(12);
  const auto sim = generate_lsirm(200, 14, 1.7, 2, rng);
  const auto p = cell_probabilities(*sim.truth.parameters);
  double resid = 0.0, var = 0.0;
  for (Eigen::Index j = 0; j < p.rows(); ++j) {
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
      resid += sim.data.value(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) - p(j, i);
      var += p(j, i) * (1.0 - p(j, i));
    }
  }
  CHECK(std::abs(resid) < 3.0 * std::sqrt(var));
  // Per item as well.
  for (Eigen::Index i = 0; i < p.cols(); ++i) {
    double r = 0.0, v = 0.0;
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      r += sim.data.value(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) - p(j, i);
      v += p(j, i) * (1.0 - p(j, i));
    }
    CHECK(std::abs(r) < 4.0 * std::sqrt(v));
  }
}

TEST_CASE("planted latent truth beats prior draws on its own data") {
  Rng rng(13);
  const auto sim = generate_lsirm(200, 14, 1.7, 2, rng);
  const double planted = log_likelihood(sim.data, *sim.truth.parameters);
  int beaten = 0;
  for (int k = 0; k < 200; ++k) {
    Rng other(1000 + static_cast<std::uint64_t>(k));
    if (planted > log_likelihood(sim.data, *generate_lsirm(200, 14, 1.7, 2, other).truth.parameters))
      ++beaten;
  }
  CHECK(beaten >= 190);
}
