#include "lsirm/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SVD>

#include "lsirm/error.hpp"

namespace lsirm {

namespace {

Eigen::MatrixXd stack(const LatentConfiguration& latent) {
  Eigen::MatrixXd out(latent.respondents.rows() + latent.items.rows(), latent.respondents.cols());
  out << latent.respondents, latent.items;
  return out;
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, q);
}

ScalarSummary summarize_trace(std::span<const double> values) {
  if (values.empty()) throw InputError("cannot summarize an empty trace");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto at = [&sorted](double q) { return sorted_quantile(sorted, q); };
  ScalarSummary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.median = at(0.5);
  s.q025 = at(0.025);
  s.q975 = at(0.975);
  return s;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw InputError("Gelman-Rubin needs at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 2) throw InputError("Gelman-Rubin needs chains of length two or more");
  for (const auto& c : chains) {
    if (c.size() != n) throw InputError("Gelman-Rubin chains must have equal length");
  }
  const auto m = static_cast<double>(chains.size());
  const auto nd = static_cast<double>(n);

  std::vector<double> means;
  double within = 0.0;
  for (const auto& c : chains) {
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / nd;
    double ss = 0.0;
    for (double x : c) ss += (x - mean) * (x - mean);
    within += ss / (nd - 1.0);
    means.push_back(mean);
  }
  within /= m;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double var_means = 0.0;
  for (double mu : means) var_means += (mu - grand) * (mu - grand);
  var_means /= (m - 1.0);  // B / n

  if (within == 0.0) {
    return var_means == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return std::sqrt((nd - 1.0) / nd + var_means / within);
}

IsometryTransform procrustes_transform(const LatentConfiguration& draw,
                                       const LatentConfiguration& reference) {
  if (draw.respondents.rows() != reference.respondents.rows() ||
      draw.items.rows() != reference.items.rows() ||
      draw.dimension() != reference.dimension()) {
    throw InputError("draw and reference configurations differ in shape");
  }
  const Eigen::MatrixXd x = stack(draw);
  const Eigen::MatrixXd y = stack(reference);
  const auto p = x.cols();

  IsometryTransform t;
  t.source_center = x.colwise().mean();
  t.target_center = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - t.source_center;
  const Eigen::MatrixXd yc = y.rowwise() - t.target_center;

  const Eigen::MatrixXd cross = xc.transpose() * yc;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double largest = sv.size() > 0 ? sv(0) : 0.0;
  const double smallest = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
  if (!(largest > 0.0) || smallest <= 1e-12 * largest) {
    t.source_center = Eigen::RowVectorXd::Zero(p);
    t.target_center = Eigen::RowVectorXd::Zero(p);
    t.rotation = Eigen::MatrixXd::Identity(p, p);
    t.fallback = true;
    return t;
  }
  t.rotation = svd.matrixU() * svd.matrixV().transpose();
  return t;
}

LatentConfiguration apply_isometry(const LatentConfiguration& latent,
                                   const IsometryTransform& t) {
  LatentConfiguration out;
  out.respondents = ((latent.respondents.rowwise() - t.source_center) * t.rotation).rowwise() +
                    t.target_center;
  out.items = ((latent.items.rowwise() - t.source_center) * t.rotation).rowwise() + t.target_center;
  return out;
}

double configuration_residual(const LatentConfiguration& a, const LatentConfiguration& b) {
  return std::sqrt((a.respondents - b.respondents).squaredNorm() +
                   (a.items - b.items).squaredNorm());
}

AlignedDraws procrustes_align(const std::vector<LatentConfiguration>& draws,
                              const LatentConfiguration& reference) {
  AlignedDraws out;
  out.reference = reference;
  out.aligned.reserve(draws.size());
  out.transforms.reserve(draws.size());
  for (const auto& d : draws) {
    auto t = procrustes_transform(d, reference);
    out.n_fallbacks += t.fallback ? 1 : 0;
    out.aligned.push_back(apply_isometry(d, t));
    out.transforms.push_back(std::move(t));
  }
  return out;
}

const ParameterSummary& PosteriorSummary::parameter(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw InputError("no parameter named '" + name + "' in summary");
}

double PosteriorSummary::max_psrf() const {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : parameters) {
    if (std::isnan(p.psrf)) continue;
    if (std::isnan(best) || p.psrf > best) best = p.psrf;
  }
  return best;
}

PosteriorSummary summarize(const std::vector<std::vector<ParameterState>>& aligned_chains,
                           const AcceptanceCounts& acceptance) {
  if (aligned_chains.empty() || aligned_chains.front().empty()) {
    throw InputError("cannot summarize an empty posterior sample");
  }
  const auto& first = aligned_chains.front().front();
  const std::size_t n = first.n_respondents();
  const std::size_t m = first.n_items();
  const bool positions = first.uses_positions();
  const bool use_psrf = aligned_chains.size() >= 2;

  PosteriorSummary out;
  out.n_chains = aligned_chains.size();
  out.kernel = first.kernel.kind;
  out.metric = first.kernel.metric;
  out.acceptance = acceptance;
  const std::size_t len = aligned_chains.front().size();
  for (const auto& c : aligned_chains) {
    if (c.size() != len) throw InputError("chains must have equal numbers of draws");
    out.n_draws += c.size();
  }

  // Extracts one scalar per draw, per chain.
  auto add = [&](std::string name, auto&& get) {
    std::vector<std::vector<double>> per_chain;
    std::vector<double> pooled;
    pooled.reserve(out.n_draws);
    for (const auto& chain : aligned_chains) {
      std::vector<double> trace;
      trace.reserve(chain.size());
      for (const auto& s : chain) trace.push_back(get(s));
      pooled.insert(pooled.end(), trace.begin(), trace.end());
      per_chain.push_back(std::move(trace));
    }
    ParameterSummary ps;
    ps.name = std::move(name);
    ps.stats = summarize_trace(pooled);
    ps.psrf = (use_psrf && len >= 2) ? gelman_rubin(per_chain)
                                     : std::numeric_limits<double>::quiet_NaN();
    out.parameters.push_back(std::move(ps));
  };

  for (std::size_t j = 0; j < n; ++j) {
    add("alpha[" + std::to_string(j + 1) + "]",
        [j](const ParameterState& s) { return s.main.alpha(static_cast<Eigen::Index>(j)); });
  }
  for (std::size_t i = 0; i < m; ++i) {
    add("beta[" + std::to_string(i + 1) + "]",
        [i](const ParameterState& s) { return s.main.beta(static_cast<Eigen::Index>(i)); });
  }
  if (first.uses_gamma()) add("gamma", [](const ParameterState& s) { return s.kernel.gamma; });
  add("sigma2", [](const ParameterState& s) { return s.sigma2; });

  if (positions) {
    const std::size_t p = first.latent.dimension();
    auto position_summary = [&](bool respondent, std::size_t row) {
      PositionSummary ps;
      ps.index = row;
      ps.mean.resize(static_cast<Eigen::Index>(p));
      ps.lower.resize(static_cast<Eigen::Index>(p));
      ps.upper.resize(static_cast<Eigen::Index>(p));
      std::vector<double> coords;
      coords.reserve(out.n_draws);
      for (std::size_t k = 0; k < p; ++k) {
        coords.clear();
        for (const auto& chain : aligned_chains) {
          for (const auto& s : chain) {
            const auto& mat = respondent ? s.latent.respondents : s.latent.items;
            coords.push_back(mat(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)));
          }
        }
        const auto st = summarize_trace(coords);
        ps.mean(static_cast<Eigen::Index>(k)) = st.mean;
        ps.lower(static_cast<Eigen::Index>(k)) = st.q025;
        ps.upper(static_cast<Eigen::Index>(k)) = st.q975;
      }
      return ps;
    };
    for (std::size_t j = 0; j < n; ++j) out.respondents.push_back(position_summary(true, j));
    for (std::size_t i = 0; i < m; ++i) out.items.push_back(position_summary(false, i));
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw InputError("cosine similarity needs two non-empty vectors of equal length");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) throw InputError("cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Eigen::MatrixXd group_center_similarity(const PositionMatrix& positions,
                                        const std::vector<std::vector<std::size_t>>& groups) {
  const auto g = static_cast<Eigen::Index>(groups.size());
  PositionMatrix centers = PositionMatrix::Zero(g, positions.cols());
  for (Eigen::Index k = 0; k < g; ++k) {
    const auto& members = groups[static_cast<std::size_t>(k)];
    if (members.empty()) throw InputError("group " + std::to_string(k + 1) + " is empty");
    for (std::size_t idx : members) {
      if (idx >= static_cast<std::size_t>(positions.rows())) {
        throw InputError("group member index out of range");
      }
      centers.row(k) += positions.row(static_cast<Eigen::Index>(idx));
    }
    centers.row(k) /= static_cast<double>(members.size());
  }
  const auto p = static_cast<std::size_t>(positions.cols());
  Eigen::MatrixXd out(g, g);
  for (Eigen::Index r = 0; r < g; ++r) {
    for (Eigen::Index c = r; c < g; ++c) {
      const double v = cosine_similarity({centers.row(r).data(), p}, {centers.row(c).data(), p});
      out(r, c) = v;
      out(c, r) = v;
    }
  }
  return out;
}

RotationResult apply_rotation(const LatentConfiguration& latent, const Eigen::MatrixXd& rotation) {
  const auto p = static_cast<Eigen::Index>(latent.dimension());
  if (rotation.rows() != p || rotation.cols() != p) {
    throw InputError("rotation must be " + std::to_string(p) + "x" + std::to_string(p));
  }
  if (!rotation.allFinite() || std::abs(rotation.determinant()) < 1e-12) {
    throw InputError("rotation matrix must be finite and invertible");
  }
  RotationResult out;
  out.latent.respondents = latent.respondents * rotation;
  out.latent.items = latent.items * rotation;
  const double defect =
      (rotation.transpose() * rotation - Eigen::MatrixXd::Identity(p, p)).norm();
  out.orthogonal = defect < 1e-10;
  if (!out.orthogonal) out.note = "distances not preserved";
  return out;
}

}  // namespace lsirm
