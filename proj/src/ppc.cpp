#include "lsirm/ppc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "lsirm/error.hpp"
#include "lsirm/model.hpp"
#include "lsirm/postproc.hpp"

namespace lsirm {

ResponseMatrix replicate(const ResponseMatrix& data, const ParameterState& draw, Rng& rng) {
  check_compatible(data, draw);
  ResponseMatrix out(data.n_respondents(), data.n_items());
  for (std::size_t j = 0; j < data.n_respondents(); ++j) {
    for (std::size_t i = 0; i < data.n_items(); ++i) {
      if (!data.observed(j, i)) continue;
      out.set(j, i, rng.bernoulli(logistic(log_odds(j, i, draw))) ? 1 : 0);
    }
  }
  return out;
}

std::vector<double> item_proportions(const ResponseMatrix& data) {
  std::vector<double> out(data.n_items(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < data.n_items(); ++i) {
    std::size_t seen = 0, ones = 0;
    for (std::size_t j = 0; j < data.n_respondents(); ++j) {
      if (!data.observed(j, i)) continue;
      ++seen;
      ones += static_cast<std::size_t>(data.value(j, i));
    }
    if (seen > 0) out[i] = static_cast<double>(ones) / static_cast<double>(seen);
  }
  return out;
}

double PpcReport::coverage() const {
  if (items.empty()) return 0.0;
  const auto inside = std::count_if(items.begin(), items.end(),
                                    [](const ItemCheck& c) { return c.inside_interval; });
  return static_cast<double>(inside) / static_cast<double>(items.size());
}

ItemCheck compare_item(double observed, const std::vector<double>& replicated) {
  ItemCheck c;
  c.observed = observed;
  if (replicated.empty()) throw InputError("no replicated proportions to compare");
  const auto n = static_cast<double>(replicated.size());
  const auto [lo, hi] = std::minmax_element(replicated.begin(), replicated.end());
  if (*lo == *hi) {
    // Exact constant; avoids rounding noise in the mean and SD.
    c.replicated_mean = *lo;
    c.replicated_sd = 0.0;
  } else {
    c.replicated_mean = std::accumulate(replicated.begin(), replicated.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : replicated) ss += (v - c.replicated_mean) * (v - c.replicated_mean);
    c.replicated_sd = replicated.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  c.replicated_q025 = quantile(replicated, 0.025);
  c.replicated_q975 = quantile(replicated, 0.975);
  c.inside_interval = observed >= c.replicated_q025 && observed <= c.replicated_q975;

  const double diff = c.replicated_mean - observed;
  if (c.replicated_sd > 0.0) {
    c.cohen_d = diff / c.replicated_sd;
  } else if (diff == 0.0) {
    c.cohen_d = 0.0;
  } else {
    c.cohen_d = std::numeric_limits<double>::quiet_NaN();
    c.undefined = true;
  }
  return c;
}

PpcReport ppc_check(const ResponseMatrix& data, const std::vector<ParameterState>& draws,
                    std::size_t n_replications, std::uint64_t seed, std::size_t threads) {
  if (draws.empty()) throw InputError("posterior predictive check needs at least one draw");
  if (n_replications == 0) throw InputError("need at least one replication");
  for (const auto& d : draws) check_compatible(data, d);

  const std::size_t items = data.n_items();
  // replicated[i][r]: proportion of item i in replication r.
  std::vector<std::vector<double>> replicated(items, std::vector<double>(n_replications));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(derive_seed(seed, r));
      const auto rep = replicate(data, draws[r % draws.size()], rng);
      const auto props = item_proportions(rep);
      for (std::size_t i = 0; i < items; ++i) replicated[i][r] = props[i];
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n_replications);
  if (threads <= 1) {
    work(0, n_replications);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_replications + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(n_replications, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }

  PpcReport report;
  report.n_replications = n_replications;
  const auto observed = item_proportions(data);
  for (std::size_t i = 0; i < items; ++i) {
    report.items.push_back(compare_item(observed[i], replicated[i]));
    const auto& c = report.items.back();
    if (c.undefined || std::abs(c.cohen_d) > report.flag_threshold) {
      report.flagged_items.push_back(i);
    }
  }
  return report;
}

}  // namespace lsirm
