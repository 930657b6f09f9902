#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lsirm/error.hpp"
#include "lsirm/fit.hpp"
#include "lsirm/io.hpp"
#include "lsirm/model.hpp"
#include "lsirm/ppc.hpp"
#include "lsirm/selection.hpp"
#include "lsirm/simgen.hpp"

namespace py = pybind11;
using namespace lsirm;

namespace {

ResponseMatrix to_responses(const Eigen::MatrixXi& values) {
  auto y = ResponseMatrix::from_dense(values);
  y.require_complete_margins();
  return y;
}

ModelConfig make_config(const std::string& kernel, const std::string& metric, std::size_t dim,
                        std::optional<double> gamma_fixed) {
  ModelConfig c;
  c.dimension = dim;
  c.kernel = parse_kernel_kind(kernel);
  c.metric = parse_metric(metric);
  if (gamma_fixed) {
    if (*gamma_fixed == 0.0) {
      c.kernel = KernelKind::none;
    } else {
      c.fixed_gamma = *gamma_fixed;
    }
  }
  return c;
}

ParameterState make_state(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                          const PositionMatrix& respondents, const PositionMatrix& items,
                          double gamma, const std::string& kernel, const std::string& metric) {
  ParameterState s;
  s.main.alpha = alpha;
  s.main.beta = beta;
  s.latent.respondents = respondents;
  s.latent.items = items;
  s.kernel = {parse_kernel_kind(kernel), parse_metric(metric), gamma};
  if (s.kernel.kind == KernelKind::none) {
    s.latent = LatentConfiguration::zeros(static_cast<std::size_t>(alpha.size()),
                                          static_cast<std::size_t>(beta.size()), 0);
  }
  s.validate();
  return s;
}

struct FitHandle {
  ResponseMatrix data;
  FitResult result;

  std::string summary() const { return io::summary_to_json(result.summary).dump(); }

  std::string ppc(std::size_t replications, std::uint64_t seed) const {
    std::vector<ParameterState> draws;
    for (const auto& c : result.aligned) draws.insert(draws.end(), c.begin(), c.end());
    return io::ppc_to_json(ppc_check(data, draws, replications, seed)).dump();
  }

  std::vector<std::vector<double>> trace(const std::string& name) const {
    std::vector<std::vector<double>> out;
    for (const auto& chain : result.aligned) {
      std::vector<double> v;
      for (const auto& d : chain) {
        if (name == "gamma") {
          v.push_back(d.kernel.gamma);
        } else if (name == "sigma2") {
          v.push_back(d.sigma2);
        } else {
          throw InputError("trace name must be gamma or sigma2");
        }
      }
      out.push_back(std::move(v));
    }
    return out;
  }

  std::vector<std::vector<double>> log_posterior() const {
    std::vector<std::vector<double>> out;
    for (const auto& c : result.chains) out.push_back(c.log_posterior);
    return out;
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian latent space item response models";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("distance",
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::string& metric) {
          return distance({a.data(), static_cast<std::size_t>(a.size())},
                          {b.data(), static_cast<std::size_t>(b.size())}, parse_metric(metric));
        },
        py::arg("a"), py::arg("b"), py::arg("metric") = "l2");

  m.def("log_likelihood",
        [](const Eigen::MatrixXi& data, const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
           const PositionMatrix& respondents, const PositionMatrix& items, double gamma,
           const std::string& kernel, const std::string& metric) {
          return log_likelihood(ResponseMatrix::from_dense(data),
                                make_state(alpha, beta, respondents, items, gamma, kernel, metric));
        },
        py::arg("data"), py::arg("alpha"), py::arg("beta"), py::arg("respondents"),
        py::arg("items"), py::arg("gamma") = 1.0, py::arg("kernel") = "distance",
        py::arg("metric") = "l2");

  m.def("simulate",
        [](const std::string& scenario, std::size_t n, std::size_t items, std::uint64_t seed,
           std::size_t n_random, double gamma, std::size_t dim, double boost) {
          Rng rng(seed);
          SimulatedData sim;
          if (scenario == "rasch") {
            sim = generate_rasch(n, items, rng);
          } else if (scenario == "local-dep") {
            sim = generate_local_dependence(n, items, default_dependence_blocks(n, items), boost, rng);
          } else if (scenario == "two-cluster") {
            sim = generate_two_cluster(n, items, n_random, rng);
          } else if (scenario == "lsirm") {
            sim = generate_lsirm(n, items, gamma, dim, rng);
          } else {
            throw InputError("unknown scenario: " + scenario);
          }
          return py::make_tuple(sim.data.to_dense(), io::truth_to_json(sim.truth).dump());
        },
        py::arg("scenario") = "rasch", py::arg("n") = 200, py::arg("items") = 14,
        py::arg("seed") = 1, py::arg("n_random") = 0, py::arg("gamma") = 1.7,
        py::arg("dim") = 2, py::arg("boost") = 2.0);

  py::class_<FitHandle>(m, "Fit")
      .def("summary_json", &FitHandle::summary)
      .def("ppc_json", &FitHandle::ppc, py::arg("replications") = 10000, py::arg("seed") = 1)
      .def("trace", &FitHandle::trace, py::arg("name"))
      .def("log_posterior", &FitHandle::log_posterior);

  m.def("fit",
        [](const Eigen::MatrixXi& data, const std::string& kernel, const std::string& metric,
           std::size_t dim, std::size_t iters, std::size_t burnin, std::size_t thin,
           std::size_t chains, std::uint64_t seed, std::optional<double> gamma_fixed,
           std::size_t threads) {
          FitHandle h{to_responses(data), {}};
          const auto config = make_config(kernel, metric, dim, gamma_fixed);
          py::gil_scoped_release release;
          h.result = fit(h.data, config, ChainSchedule{iters, burnin, thin, chains, seed}, threads);
          return h;
        },
        py::arg("data"), py::arg("kernel") = "distance", py::arg("metric") = "l2",
        py::arg("dim") = 2, py::arg("iters") = 20000, py::arg("burnin") = 10000,
        py::arg("thin") = 10, py::arg("chains") = 3, py::arg("seed") = 1,
        py::arg("gamma_fixed") = py::none(), py::arg("threads") = 1);

  m.def("select",
        [](const Eigen::MatrixXi& data, const std::string& metric, std::size_t dim,
           std::size_t iters, std::size_t burnin, std::size_t chains, std::uint64_t seed,
           std::size_t threads) {
          const auto y = to_responses(data);
          auto config = make_config("distance", metric, dim, std::nullopt);
          config.spike_slab = true;
          config.record_draws = false;
          SelectionResult r;
          {
            py::gil_scoped_release release;
            r = run_selection(y, config, ChainSchedule{iters, burnin, 1, chains, seed}, threads);
          }
          return io::selection_to_json(r).dump();
        },
        py::arg("data"), py::arg("metric") = "l2", py::arg("dim") = 2, py::arg("iters") = 10000,
        py::arg("burnin") = 5000, py::arg("chains") = 3, py::arg("seed") = 1,
        py::arg("threads") = 1);

  m.def("procrustes",
        [](const PositionMatrix& respondents, const PositionMatrix& items,
           const PositionMatrix& ref_respondents, const PositionMatrix& ref_items) {
          const LatentConfiguration draw{respondents, items};
          const LatentConfiguration ref{ref_respondents, ref_items};
          const auto aligned = apply_isometry(draw, procrustes_transform(draw, ref));
          return py::make_tuple(aligned.respondents, aligned.items);
        },
        py::arg("respondents"), py::arg("items"), py::arg("ref_respondents"),
        py::arg("ref_items"));
}
