#pragma once

#include <cstdint>
#include <random>

namespace lsirm {

/// SplitMix64 finalizer applied to master + (stream + 1) * golden-ratio
/// increment. Stream k of master seed s is always the same regardless of how
/// many streams are drawn or in which order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Per-chain random source. Owns its distribution objects so the full state
/// (including any cached normal deviate) travels with the engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Gamma(shape, scale = 1).
  double gamma(double shape);
  double beta(double a, double b);
  /// Inverse-gamma with the given shape and scale.
  double inverse_gamma(double shape, double scale) { return scale / gamma(shape); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace lsirm
