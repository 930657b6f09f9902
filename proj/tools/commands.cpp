#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lsirm/error.hpp"
#include "lsirm/fit.hpp"
#include "lsirm/io.hpp"
#include "lsirm/postproc.hpp"
#include "lsirm/ppc.hpp"
#include "lsirm/selection.hpp"
#include "lsirm/simgen.hpp"

namespace lsirm::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ModelOptions {
  std::size_t dim = 2;
  std::string kernel = "distance";
  std::string metric = "l2";
  std::optional<double> gamma_fixed;
  Hyperparameters hyper;
  ProposalScales scales;
  bool no_tune = false;
  std::size_t tune_interval = 500;
  std::size_t tune_rounds = 10;

  ModelConfig to_config() const {
    ModelConfig c;
    c.dimension = dim;
    c.kernel = parse_kernel_kind(kernel);
    c.metric = parse_metric(metric);
    c.hyper = hyper;
    c.scales = scales;
    c.tuning.enabled = !no_tune;
    c.tuning.interval = tune_interval;
    c.tuning.max_rounds = tune_rounds;
    if (gamma_fixed) {
      if (*gamma_fixed == 0.0) {
        // gamma = 0 is exactly the Rasch model.
        c.kernel = KernelKind::none;
      } else {
        c.fixed_gamma = *gamma_fixed;
      }
    }
    return c;
  }
};

struct ScheduleOptions {
  std::size_t iters = 20000;
  std::size_t burnin = 10000;
  std::size_t thin = 10;
  std::size_t chains = 3;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  ChainSchedule to_schedule() const { return {iters, burnin, thin, chains, seed}; }
};

void add_model_options(CLI::App* sub, ModelOptions& m) {
  sub->add_option("--dim", m.dim, "Latent space dimension")->capture_default_str();
  sub->add_option("--kernel", m.kernel, "Interaction kernel")
      ->check(CLI::IsMember({"distance", "multiplicative", "none"}))
      ->capture_default_str();
  sub->add_option("--metric", m.metric, "Distance metric")
      ->check(CLI::IsMember({"l1", "l2", "linf"}))
      ->capture_default_str();
  sub->add_option("--gamma-fixed", m.gamma_fixed, "Hold gamma fixed (0 fits the Rasch model)");
  sub->add_option("--a-sigma", m.hyper.a_sigma, "Inv-Gamma shape for sigma^2")->capture_default_str();
  sub->add_option("--b-sigma", m.hyper.b_sigma, "Inv-Gamma scale for sigma^2")->capture_default_str();
  sub->add_option("--tau2-beta", m.hyper.tau2_beta, "Prior variance of beta")->capture_default_str();
  sub->add_option("--mu-gamma", m.hyper.mu_gamma, "Prior mean of log gamma")->capture_default_str();
  sub->add_option("--tau2-gamma", m.hyper.tau2_gamma, "Prior variance of log gamma")
      ->capture_default_str();
  sub->add_option("--spike-mean", m.hyper.spike_mean)->capture_default_str();
  sub->add_option("--spike-var", m.hyper.spike_var)->capture_default_str();
  sub->add_option("--slab-mean", m.hyper.slab_mean)->capture_default_str();
  sub->add_option("--slab-var", m.hyper.slab_var)->capture_default_str();
  sub->add_option("--s-alpha", m.scales.alpha, "Proposal SD for alpha")->capture_default_str();
  sub->add_option("--s-beta", m.scales.beta, "Proposal SD for beta")->capture_default_str();
  sub->add_option("--s-gamma", m.scales.log_gamma, "Proposal SD for log gamma")
      ->capture_default_str();
  sub->add_option("--s-pos-a", m.scales.pos_a, "Proposal SD for respondent positions")
      ->capture_default_str();
  sub->add_option("--s-pos-b", m.scales.pos_b, "Proposal SD for item positions")
      ->capture_default_str();
  sub->add_flag("--no-tune", m.no_tune, "Keep proposal SDs fixed during burn-in");
  sub->add_option("--tune-interval", m.tune_interval, "Sweeps per tuning round")
      ->capture_default_str();
  sub->add_option("--tune-rounds", m.tune_rounds, "Maximum tuning rounds")->capture_default_str();
}

void add_schedule_options(CLI::App* sub, ScheduleOptions& s) {
  sub->add_option("--iters", s.iters, "Total iterations per chain")->capture_default_str();
  sub->add_option("--burnin", s.burnin, "Burn-in iterations")->capture_default_str();
  sub->add_option("--thin", s.thin, "Keep every thin-th post-burn-in draw")->capture_default_str();
  sub->add_option("--chains", s.chains, "Number of chains")->capture_default_str();
  sub->add_option("--seed", s.seed, "Master seed")->capture_default_str();
  sub->add_option("--threads", s.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

std::string config_placeholder;

void add_config_option(CLI::App* sub) {
  sub->add_option("--config", config_placeholder,
                  "Read options from a key=value file; command-line values take precedence");
}

std::string unquote(std::string v) {
  while (!v.empty() && (v.back() == '\r' || v.back() == ' ')) v.pop_back();
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return v;
}

/// Replaces `--config <path>` with the file's key=value pairs as `--key value`
/// arguments, skipping keys already given on the command line. Boolean values
/// map to flags.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    } else {
      out.push_back(args[k]);
    }
  }
  if (path.empty()) return out;

  std::vector<std::string> given;
  for (const auto& a : out) {
    if (a.rfind("--", 0) == 0) given.push_back(a.substr(2, a.find('=') - 2));
  }
  std::istringstream lines(io::read_text(path));
  for (std::string line; std::getline(lines, line);) {
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config line without '=': " + line);
    std::string key = unquote(line.substr(0, eq));
    const std::string value = unquote(line.substr(eq + 1));
    if (key.empty() || key == "config" || value.empty()) continue;
    if (std::find(given.begin(), given.end(), key) != given.end()) continue;
    if (value == "true") {
      out.push_back("--" + key);
    } else if (value != "false") {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Writes the run manifest plus a key=value file that reproduces the run.
void write_manifest(const fs::path& dir, const std::string& manifest_name,
                    const CLI::App& sub, const std::vector<fs::path>& inputs,
                    const std::vector<std::string>& outputs, const json& seeds, double seconds) {
  const std::string conf_name = sub.get_name() + ".conf";
  const std::string conf = sub.config_to_str(true, false);
  io::write_text(dir / conf_name, conf);

  json config = json::object();
  std::istringstream lines(conf);
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    config[line.substr(0, eq)] = line.substr(eq + 1);
  }
  json in = json::array();
  for (const auto& p : inputs) {
    in.push_back({{"path", p.string()}, {"fnv1a64", io::file_checksum(p)}});
  }
  json manifest{{"schema", io::kSchemaVersion},
                {"command", sub.get_name()},
                {"version", kVersion},
                {"config", config},
                {"config_file", conf_name},
                {"seeds", seeds},
                {"inputs", in},
                {"outputs", outputs},
                {"timing_seconds", seconds},
                {"rerun", "lsirm " + sub.get_name() + " --config " + (dir / conf_name).string()}};
  io::write_text(dir / manifest_name, dump(manifest));
}

json chain_seeds(const ChainSchedule& schedule) {
  json seeds{{"master", schedule.seed}, {"chains", json::array()}};
  for (std::size_t c = 0; c < schedule.n_chains; ++c) {
    seeds["chains"].push_back(derive_seed(schedule.seed, c));
  }
  return seeds;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string());
}

void write_traces_file(const fs::path& path, const std::vector<std::vector<ParameterState>>& chains,
                       const std::vector<std::vector<double>>& log_post) {
  std::ostringstream os;
  io::write_traces(os, chains, log_post);
  io::write_text(path, os.str());
}

void write_summary_bundle(const fs::path& dir, const PosteriorSummary& summary) {
  io::write_text(dir / "summary.json", dump(io::summary_to_json(summary)));
  if (!summary.respondents.empty()) {
    std::ostringstream os;
    io::write_positions(os, summary);
    io::write_text(dir / "positions.csv", os.str());
  }
}

io::TraceTable load_fit_bundle(const fs::path& dir, json* summary_json) {
  const auto summary = json::parse(io::read_text(dir / "summary.json"), nullptr, false);
  if (summary.is_discarded() || !summary.contains("metric")) {
    throw InputError("fit bundle " + dir.string() + " has no readable summary.json");
  }
  std::ifstream traces(dir / "traces.csv");
  if (!traces) throw InputError("fit bundle " + dir.string() + " has no traces.csv");
  if (summary_json != nullptr) *summary_json = summary;
  return io::read_traces(traces, parse_metric(summary.at("metric").get<std::string>()));
}

// ---------------------------------------------------------------------------

struct FitCommand {
  std::string data;
  std::string out = "fit_out";
  ModelOptions model;
  ScheduleOptions schedule;
  bool strict = false;
  double psrf_threshold = 1.1;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("fit", "Run the sampler, align draws and summarize");
    sub->add_option("--data", data, "Response CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory")->capture_default_str();
    add_model_options(sub, model);
    add_schedule_options(sub, schedule);
    sub->add_flag("--strict", strict, "Exit with code 4 when the PSRF check fails");
    sub->add_option("--psrf-threshold", psrf_threshold)->capture_default_str();
    add_config_option(sub);
  }

  int run(const CLI::App& sub, std::ostream& os) {
    const auto start = std::chrono::steady_clock::now();
    const auto responses = io::read_responses_csv(data);
    const auto config = model.to_config();
    const auto sched = schedule.to_schedule();
    const auto result = lsirm::fit(responses, config, sched, schedule.threads);

    const fs::path dir(out);
    ensure_dir(dir);
    std::vector<std::vector<double>> log_post;
    for (const auto& c : result.chains) log_post.push_back(c.log_posterior);
    write_traces_file(dir / "traces.csv", result.aligned, log_post);
    write_summary_bundle(dir, result.summary);

    std::vector<std::string> outputs{"summary.json", "traces.csv"};
    if (!result.summary.respondents.empty()) outputs.push_back("positions.csv");
    write_manifest(dir, "manifest.json", sub, {fs::path(data)}, outputs, chain_seeds(sched),
                   elapsed(start));

    const double psrf = result.summary.max_psrf();
    os << "draws: " << result.summary.n_draws << " over " << result.summary.n_chains
       << " chain(s)\n";
    if (result.summary.kernel == KernelKind::distance) {
      os << "gamma median: " << io::format_double(result.summary.parameter("gamma").stats.median)
         << '\n';
    }
    os << "max PSRF: " << io::format_double(psrf) << '\n';
    if (result.alignment_fallbacks > 0) {
      os << "warning: " << result.alignment_fallbacks
         << " draw(s) could not be Procrustes-aligned (rank deficient); left unchanged\n";
    }
    if (strict && sched.n_chains >= 2 && !(psrf < psrf_threshold)) {
      os << "non-convergence: max PSRF " << io::format_double(psrf) << " >= "
         << io::format_double(psrf_threshold) << '\n';
      return kNonConvergence;
    }
    return kSuccess;
  }
};

struct SelectCommand {
  std::string data;
  std::string out;
  ModelOptions model;
  ScheduleOptions schedule;
  bool strict = false;

  SelectCommand() {
    schedule.iters = 10000;
    schedule.burnin = 5000;
    schedule.thin = 1;
  }

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("select", "Spike-and-slab choice between Rasch and LSIRM");
    sub->add_option("--data", data, "Response CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (selection.json, manifest.json)");
    add_model_options(sub, model);
    add_schedule_options(sub, schedule);
    sub->add_flag("--strict", strict, "Exit with code 4 when a convergence warning is raised");
    add_config_option(sub);
  }

  int run(const CLI::App& sub, std::ostream& os) {
    const auto start = std::chrono::steady_clock::now();
    const auto responses = io::read_responses_csv(data);
    auto config = model.to_config();
    if (config.kernel != KernelKind::distance || config.fixed_gamma) {
      throw InputError("select needs the distance kernel with a free gamma");
    }
    const auto sched = schedule.to_schedule();
    const auto result = run_selection(responses, config, sched, schedule.threads);
    const auto j = io::selection_to_json(result);

    char line[64];
    std::snprintf(line, sizeof(line), "%.3f", result.inclusion_probability);
    os << "inclusion_probability: " << line << '\n';
    os << "chosen_model: " << to_string(result.chosen_model) << '\n';
    for (const auto& w : result.warnings) os << "warning: " << w << '\n';

    if (!out.empty()) {
      const fs::path dir(out);
      ensure_dir(dir);
      io::write_text(dir / "selection.json", dump(j));
      write_manifest(dir, "manifest.json", sub, {fs::path(data)}, {"selection.json"},
                     chain_seeds(sched), elapsed(start));
    }
    if (strict && !result.warnings.empty()) return kNonConvergence;
    return kSuccess;
  }
};

struct SimulateCommand {
  std::string scenario = "rasch";
  std::size_t n = 200;
  std::size_t items = 14;
  std::size_t reps = 1;
  std::size_t n_random = 0;
  double gamma = 1.7;
  std::size_t dim = 2;
  double boost = 2.0;
  std::uint64_t seed = 1;
  std::string out = "sim_out";

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("simulate", "Generate synthetic response datasets");
    sub->add_option("--scenario", scenario)
        ->check(CLI::IsMember({"rasch", "local-dep", "two-cluster", "lsirm"}))
        ->capture_default_str();
    sub->add_option("--n", n, "Respondents")->capture_default_str();
    sub->add_option("--i", items, "Items")->capture_default_str();
    sub->add_option("--reps", reps, "Number of datasets")->capture_default_str();
    sub->add_option("--random", n_random, "Random responders (two-cluster)")->capture_default_str();
    sub->add_option("--gamma", gamma, "Distance weight (lsirm)")->capture_default_str();
    sub->add_option("--dim", dim, "Latent dimension (lsirm)")->capture_default_str();
    sub->add_option("--boost", boost, "Log-odds boost inside dependence blocks (local-dep)")
        ->capture_default_str();
    sub->add_option("--seed", seed, "Master seed")->capture_default_str();
    sub->add_option("--out", out, "Output directory")->capture_default_str();
    add_config_option(sub);
  }

  int run(const CLI::App& sub, std::ostream& os) {
    const auto start = std::chrono::steady_clock::now();
    if (reps == 0) throw InputError("--reps must be positive");
    const fs::path dir(out);
    ensure_dir(dir);
    std::vector<std::string> outputs;
    json seeds{{"master", seed}, {"datasets", json::array()}};
    for (std::size_t r = 0; r < reps; ++r) {
      const auto rep_seed = derive_seed(seed, r);
      seeds["datasets"].push_back(rep_seed);
      Rng rng(rep_seed);
      SimulatedData sim = [&] {
        if (scenario == "rasch") return generate_rasch(n, items, rng);
        if (scenario == "local-dep") {
          return generate_local_dependence(n, items, default_dependence_blocks(n, items), boost, rng);
        }
        if (scenario == "two-cluster") return generate_two_cluster(n, items, n_random, rng);
        return generate_lsirm(n, items, gamma, dim, rng);
      }();
      char stem[32];
      std::snprintf(stem, sizeof(stem), "%03zu", r + 1);
      const std::string data_name = reps == 1 ? "data.csv" : std::string("data_") + stem + ".csv";
      const std::string truth_name = reps == 1 ? "truth.json" : std::string("truth_") + stem + ".json";
      std::ostringstream csv;
      io::write_responses_csv(csv, sim.data);
      io::write_text(dir / data_name, csv.str());
      io::write_text(dir / truth_name, dump(io::truth_to_json(sim.truth)));
      outputs.push_back(data_name);
      outputs.push_back(truth_name);
    }
    write_manifest(dir, "manifest.json", sub, {}, outputs, seeds, elapsed(start));
    os << "wrote " << reps << " dataset(s) to " << dir.string() << '\n';
    return kSuccess;
  }
};

struct PpcCommand {
  std::string data;
  std::string fit_dir;
  std::string out;
  std::size_t replications = 10000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("ppc", "Posterior predictive check of item proportions");
    sub->add_option("--data", data, "Response CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--fit", fit_dir, "Fit output directory")->required()->check(CLI::ExistingDirectory);
    sub->add_option("--out", out, "Output directory (defaults to the fit directory)");
    sub->add_option("--replications", replications)->capture_default_str();
    sub->add_option("--seed", seed)->capture_default_str();
    sub->add_option("--threads", threads)->capture_default_str();
    add_config_option(sub);
  }

  int run(const CLI::App& sub, std::ostream& os) {
    const auto start = std::chrono::steady_clock::now();
    const auto responses = io::read_responses_csv(data);
    const auto table = load_fit_bundle(fit_dir, nullptr);
    std::vector<ParameterState> draws;
    for (const auto& c : table.chains) draws.insert(draws.end(), c.begin(), c.end());
    const auto report = ppc_check(responses, draws, replications, seed, threads);

    const fs::path dir(out.empty() ? fit_dir : out);
    ensure_dir(dir);
    io::write_text(dir / "ppc.json", dump(io::ppc_to_json(report)));
    write_manifest(dir, "ppc.manifest.json", sub,
                   {fs::path(data), fs::path(fit_dir) / "traces.csv"}, {"ppc.json"},
                   json{{"master", seed}}, elapsed(start));
    os << "items flagged (|d| > " << report.flag_threshold << "): " << report.flagged_items.size()
       << '\n';
    os << "coverage of 95% intervals: " << io::format_double(report.coverage()) << '\n';
    return kSuccess;
  }
};

struct SummarizeCommand {
  std::string fit_dir;
  std::string out;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("summarize", "Recompute summary.json and positions.csv from traces");
    sub->add_option("--fit", fit_dir, "Fit output directory")->required()->check(CLI::ExistingDirectory);
    sub->add_option("--out", out, "Output directory (defaults to the fit directory)");
    add_config_option(sub);
  }

  int run(const CLI::App& sub, std::ostream& os) {
    const auto start = std::chrono::steady_clock::now();
    json previous;
    const auto table = load_fit_bundle(fit_dir, &previous);
    AcceptanceCounts acceptance;
    if (previous.contains("acceptance")) acceptance = io::acceptance_from_json(previous["acceptance"]);
    const auto summary = summarize(table.chains, acceptance);

    const fs::path dir(out.empty() ? fit_dir : out);
    ensure_dir(dir);
    write_summary_bundle(dir, summary);
    std::vector<std::string> outputs{"summary.json"};
    if (!summary.respondents.empty()) outputs.push_back("positions.csv");
    write_manifest(dir, "summarize.manifest.json", sub, {fs::path(fit_dir) / "traces.csv"},
                   outputs, json::object(), elapsed(start));
    os << "summarized " << summary.n_draws << " draws\n";
    return kSuccess;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent space item response model: Bayesian fitting and model selection", "lsirm"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  FitCommand fit_cmd;
  SelectCommand select_cmd;
  SimulateCommand simulate_cmd;
  PpcCommand ppc_cmd;
  SummarizeCommand summarize_cmd;
  fit_cmd.attach(app);
  select_cmd.attach(app);
  simulate_cmd.attach(app);
  ppc_cmd.attach(app);
  summarize_cmd.attach(app);

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  }
  std::vector<const char*> argv;
  argv.reserve(expanded.size() + 1);
  if (expanded.empty()) argv.push_back("lsirm");
  for (const auto& a : expanded) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    for (const auto* sub : app.get_subcommands()) {
      const auto& name = sub->get_name();
      if (name == "fit") return fit_cmd.run(*sub, out);
      if (name == "select") return select_cmd.run(*sub, out);
      if (name == "simulate") return simulate_cmd.run(*sub, out);
      if (name == "ppc") return ppc_cmd.run(*sub, out);
      if (name == "summarize") return summarize_cmd.run(*sub, out);
    }
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const UsageError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace lsirm::cli
