#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lsirm/sampler.hpp"
#include "lsirm/types.hpp"

namespace lsirm {

/// Empirical quantile by linear interpolation between order statistics:
/// h = (n - 1) q, result = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h]).
double quantile(std::span<const double> values, double q);

struct ScalarSummary {
  double mean = 0.0;
  double median = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

ScalarSummary summarize_trace(std::span<const double> values);

/// Potential scale reduction factor for m >= 2 equal-length chains:
/// sqrt((n - 1)/n + B/(n W)), W the mean within-chain variance and B/n the
/// variance of the chain means. Returns 1 when W = 0 and all means agree and
/// +infinity when W = 0 but the means differ.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

/// Isometry x -> (x - source_center) rotation + target_center, applied to
/// stacked row positions.
struct IsometryTransform {
  Eigen::RowVectorXd source_center;
  Eigen::RowVectorXd target_center;
  Eigen::MatrixXd rotation;  // orthogonal p x p
  bool fallback = false;     // identity used because the problem was rank deficient

  /// Translation t with x -> x rotation + t.
  Eigen::RowVectorXd translation() const { return target_center - source_center * rotation; }
};

struct AlignedDraws {
  LatentConfiguration reference;
  std::vector<LatentConfiguration> aligned;
  std::vector<IsometryTransform> transforms;
  std::size_t n_fallbacks = 0;
};

/// Orthogonal Procrustes match (rotation or reflection, no scaling) of the
/// stacked respondent and item positions of `draw` onto `reference`.
IsometryTransform procrustes_transform(const LatentConfiguration& draw,
                                       const LatentConfiguration& reference);

LatentConfiguration apply_isometry(const LatentConfiguration& latent,
                                   const IsometryTransform& transform);

/// Frobenius distance between two configurations' stacked positions.
double configuration_residual(const LatentConfiguration& a, const LatentConfiguration& b);

AlignedDraws procrustes_align(const std::vector<LatentConfiguration>& draws,
                              const LatentConfiguration& reference);

struct ParameterSummary {
  std::string name;
  ScalarSummary stats;
  /// NaN with fewer than two chains.
  double psrf = 0.0;
};

struct PositionSummary {
  std::size_t index = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;  // 2.5% per coordinate
  Eigen::VectorXd upper;  // 97.5% per coordinate
};

struct PosteriorSummary {
  std::size_t n_chains = 0;
  std::size_t n_draws = 0;
  KernelKind kernel = KernelKind::distance;
  Metric metric = Metric::l2;
  std::vector<ParameterSummary> parameters;  // alpha[j], beta[i], gamma, sigma2
  std::vector<PositionSummary> respondents;
  std::vector<PositionSummary> items;
  AcceptanceCounts acceptance;

  const ParameterSummary& parameter(const std::string& name) const;
  /// Largest finite-or-infinite PSRF over the listed parameters (NaN if none).
  double max_psrf() const;
};

/// Reduces aligned per-chain draws to means, medians, 95% intervals and PSRFs.
PosteriorSummary summarize(const std::vector<std::vector<ParameterState>>& aligned_chains,
                           const AcceptanceCounts& acceptance = {});

/// a.b / (|a| |b|). Throws InputError for zero vectors or mismatched sizes.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Pairwise cosine similarity of the mean position of each group of rows.
Eigen::MatrixXd group_center_similarity(const PositionMatrix& positions,
                                        const std::vector<std::vector<std::size_t>>& groups);

struct RotationResult {
  LatentConfiguration latent;
  bool orthogonal = true;
  std::string note;  // "distances not preserved" for non-orthogonal R
};

/// Multiplies respondent and item positions by the same invertible p x p R.
RotationResult apply_rotation(const LatentConfiguration& latent, const Eigen::MatrixXd& rotation);

}  // namespace lsirm
