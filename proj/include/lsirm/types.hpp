#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace lsirm {

/// Row-major so that each unit's p-vector is contiguous.
using PositionMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N x I binary responses with an observation mask.
///
/// Observed cells always hold 0 or 1. The type itself allows rows or columns
/// without any observation (useful for prior-only runs); loaders call
/// require_complete_margins() to reject such data.
class ResponseMatrix {
 public:
  ResponseMatrix() = default;
  /// All cells start unobserved.
  ResponseMatrix(std::size_t n_respondents, std::size_t n_items);

  /// Builds from an integer matrix where 0/1 are responses and any negative
  /// value marks a missing cell. Other values are rejected.
  static ResponseMatrix from_dense(const Eigen::MatrixXi& values);

  std::size_t n_respondents() const { return n_respondents_; }
  std::size_t n_items() const { return n_items_; }

  bool observed(std::size_t j, std::size_t i) const {
    return observed_[j * n_items_ + i] != 0;
  }
  /// Response value; 0 for unobserved cells.
  int value(std::size_t j, std::size_t i) const {
    return values_[j * n_items_ + i];
  }

  void set(std::size_t j, std::size_t i, int value);
  void set_missing(std::size_t j, std::size_t i);

  std::size_t n_observed() const;

  /// Throws InputError if any respondent row or item column has no observed
  /// cell.
  void require_complete_margins() const;

  /// Dense copy with -1 for missing cells.
  Eigen::MatrixXi to_dense() const;

  bool operator==(const ResponseMatrix&) const = default;

 private:
  void check_index(std::size_t j, std::size_t i) const;

  std::size_t n_respondents_ = 0;
  std::size_t n_items_ = 0;
  std::vector<std::uint8_t> values_;
  std::vector<std::uint8_t> observed_;
};

struct LatentConfiguration {
  PositionMatrix respondents;  // N x p
  PositionMatrix items;        // I x p

  std::size_t dimension() const {
    return static_cast<std::size_t>(respondents.cols());
  }
  std::span<const double> respondent(std::size_t j) const {
    return {respondents.row(static_cast<Eigen::Index>(j)).data(), dimension()};
  }
  std::span<const double> item(std::size_t i) const {
    return {items.row(static_cast<Eigen::Index>(i)).data(), dimension()};
  }

  /// Throws InputError if dimensions disagree or entries are non-finite.
  void validate() const;

  static LatentConfiguration zeros(std::size_t n_respondents,
                                   std::size_t n_items, std::size_t dimension);
};

struct MainEffects {
  Eigen::VectorXd alpha;  // respondent ability, length N
  Eigen::VectorXd beta;   // item easiness, length I
};

enum class KernelKind { distance, multiplicative, none };
enum class Metric { l1, l2, linf };

std::string_view to_string(KernelKind kind);
std::string_view to_string(Metric metric);
KernelKind parse_kernel_kind(std::string_view text);
Metric parse_metric(std::string_view text);

struct InteractionKernel {
  KernelKind kind = KernelKind::distance;
  Metric metric = Metric::l2;
  /// Weight of the distance term; only meaningful for KernelKind::distance.
  double gamma = 1.0;

  static InteractionKernel rasch() { return {KernelKind::none, Metric::l2, 0.0}; }
};

/// Prior settings. The log-gamma prior is stored on the log scale.
struct Hyperparameters {
  double a_sigma = 1.0;  // Inv-Gamma shape for sigma^2
  double b_sigma = 1.0;  // Inv-Gamma scale for sigma^2
  double tau2_beta = 4.0;
  double mu_gamma = 0.5;
  double tau2_gamma = 1.0;
  double spike_mean = -3.0;
  double spike_var = 1.0;
  double slab_mean = 0.5;
  double slab_var = 1.0;

  void validate() const;
};

/// One point of the Markov chain.
struct ParameterState {
  MainEffects main;
  LatentConfiguration latent;
  InteractionKernel kernel;
  double sigma2 = 1.0;
  int delta = 1;       // slab indicator, selection runs only
  double omega = 0.5;  // slab weight, selection runs only

  std::size_t n_respondents() const {
    return static_cast<std::size_t>(main.alpha.size());
  }
  std::size_t n_items() const {
    return static_cast<std::size_t>(main.beta.size());
  }
  bool uses_positions() const { return kernel.kind != KernelKind::none; }
  bool uses_gamma() const { return kernel.kind == KernelKind::distance; }

  /// Throws InputError if shapes are inconsistent or values out of range.
  void validate() const;
};

}  // namespace lsirm
