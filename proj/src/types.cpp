#include "lsirm/types.hpp"

#include <cmath>
#include <string>

#include "lsirm/error.hpp"

namespace lsirm {

ResponseMatrix::ResponseMatrix(std::size_t n_respondents, std::size_t n_items)
    : n_respondents_(n_respondents),
      n_items_(n_items),
      values_(n_respondents * n_items, 0),
      observed_(n_respondents * n_items, 0) {
  if (n_respondents == 0 || n_items == 0) {
    throw InputError("response matrix needs at least one respondent and one item");
  }
}

ResponseMatrix ResponseMatrix::from_dense(const Eigen::MatrixXi& values) {
  ResponseMatrix out(static_cast<std::size_t>(values.rows()),
                     static_cast<std::size_t>(values.cols()));
  for (Eigen::Index j = 0; j < values.rows(); ++j) {
    for (Eigen::Index i = 0; i < values.cols(); ++i) {
      const int v = values(j, i);
      if (v < 0) continue;
      out.set(static_cast<std::size_t>(j), static_cast<std::size_t>(i), v);
    }
  }
  return out;
}

void ResponseMatrix::check_index(std::size_t j, std::size_t i) const {
  if (j >= n_respondents_ || i >= n_items_) {
    throw InputError("cell (" + std::to_string(j) + ", " + std::to_string(i) +
                     ") outside " + std::to_string(n_respondents_) + "x" +
                     std::to_string(n_items_) + " response matrix");
  }
}

void ResponseMatrix::set(std::size_t j, std::size_t i, int value) {
  check_index(j, i);
  if (value != 0 && value != 1) {
    throw InputError("responses must be 0 or 1, got " + std::to_string(value));
  }
  values_[j * n_items_ + i] = static_cast<std::uint8_t>(value);
  observed_[j * n_items_ + i] = 1;
}

void ResponseMatrix::set_missing(std::size_t j, std::size_t i) {
  check_index(j, i);
  values_[j * n_items_ + i] = 0;
  observed_[j * n_items_ + i] = 0;
}

std::size_t ResponseMatrix::n_observed() const {
  std::size_t n = 0;
  for (auto o : observed_) n += o;
  return n;
}

void ResponseMatrix::require_complete_margins() const {
  for (std::size_t j = 0; j < n_respondents_; ++j) {
    bool any = false;
    for (std::size_t i = 0; i < n_items_ && !any; ++i) any = observed(j, i);
    if (!any) {
      throw InputError("respondent " + std::to_string(j + 1) +
                       " has no observed responses");
    }
  }
  for (std::size_t i = 0; i < n_items_; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n_respondents_ && !any; ++j) any = observed(j, i);
    if (!any) {
      throw InputError("item " + std::to_string(i + 1) +
                       " has no observed responses");
    }
  }
}

Eigen::MatrixXi ResponseMatrix::to_dense() const {
  Eigen::MatrixXi out(static_cast<Eigen::Index>(n_respondents_),
                      static_cast<Eigen::Index>(n_items_));
  for (std::size_t j = 0; j < n_respondents_; ++j) {
    for (std::size_t i = 0; i < n_items_; ++i) {
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          observed(j, i) ? value(j, i) : -1;
    }
  }
  return out;
}

void LatentConfiguration::validate() const {
  if (respondents.cols() != items.cols()) {
    throw InputError("respondent and item positions must share a dimension");
  }
  if (respondents.cols() < 1) {
    throw InputError("latent dimension must be positive");
  }
  if (!respondents.allFinite() || !items.allFinite()) {
    throw InputError("latent positions must be finite");
  }
}

LatentConfiguration LatentConfiguration::zeros(std::size_t n_respondents,
                                               std::size_t n_items,
                                               std::size_t dimension) {
  const auto p = static_cast<Eigen::Index>(dimension);
  return {PositionMatrix::Zero(static_cast<Eigen::Index>(n_respondents), p),
          PositionMatrix::Zero(static_cast<Eigen::Index>(n_items), p)};
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::distance: return "distance";
    case KernelKind::multiplicative: return "multiplicative";
    case KernelKind::none: return "none";
  }
  return "unknown";
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::l1: return "l1";
    case Metric::l2: return "l2";
    case Metric::linf: return "linf";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view text) {
  if (text == "distance") return KernelKind::distance;
  if (text == "multiplicative") return KernelKind::multiplicative;
  if (text == "none" || text == "rasch") return KernelKind::none;
  throw InputError("unknown kernel kind '" + std::string(text) + "'");
}

Metric parse_metric(std::string_view text) {
  if (text == "l1") return Metric::l1;
  if (text == "l2") return Metric::l2;
  if (text == "linf") return Metric::linf;
  throw InputError("unknown metric '" + std::string(text) + "'");
}

void Hyperparameters::validate() const {
  if (!(a_sigma > 0) || !(b_sigma > 0)) {
    throw InputError("Inv-Gamma shape and scale must be positive");
  }
  if (!(tau2_beta > 0) || !(tau2_gamma > 0) || !(spike_var > 0) ||
      !(slab_var > 0)) {
    throw InputError("prior variances must be positive");
  }
  if (!std::isfinite(mu_gamma) || !std::isfinite(spike_mean) ||
      !std::isfinite(slab_mean)) {
    throw InputError("prior means must be finite");
  }
}

void ParameterState::validate() const {
  if (main.alpha.size() == 0 || main.beta.size() == 0) {
    throw InputError("state needs at least one respondent and one item");
  }
  if (!main.alpha.allFinite() || !main.beta.allFinite()) {
    throw InputError("main effects must be finite");
  }
  if (!(sigma2 > 0) || !std::isfinite(sigma2)) {
    throw InputError("sigma2 must be positive and finite");
  }
  if (!(omega >= 0.0 && omega <= 1.0)) {
    throw InputError("omega must lie in [0, 1]");
  }
  if (delta != 0 && delta != 1) throw InputError("delta must be 0 or 1");
  if (kernel.kind == KernelKind::distance &&
      !(kernel.gamma >= 0 && std::isfinite(kernel.gamma))) {
    throw InputError("gamma must be nonnegative and finite");
  }
  if (uses_positions()) {
    latent.validate();
    if (latent.respondents.rows() != main.alpha.size() ||
        latent.items.rows() != main.beta.size()) {
      throw InputError("latent positions do not match main-effect lengths");
    }
  }
}

}  // namespace lsirm
