#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "lsirm/error.hpp"
#include "lsirm/fit.hpp"
#include "lsirm/io.hpp"
#include "lsirm/simgen.hpp"
#include "stats.hpp"

using namespace lsirm;
using lsirm::testing::random_responses;
using lsirm::testing::random_state;

namespace {

ResponseMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return io::parse_responses_csv(in);
}

}  // namespace

TEST_CASE("CSV with and without a header") {
  const auto a = parse("q1,q2,q3\n1,0,NA\n0,1,1\n");
  const auto b = parse("1,0,NA\n0,1,1\n");
  CHECK(a == b);
  CHECK(a.n_respondents() == 2);
  CHECK_FALSE(a.observed(0, 2));
  CHECK(a.value(1, 2) == 1);
  CHECK(parse("1,,0\n0,1,1\n") == parse("1,NA,0\n0,1,1\n"));
  CHECK(parse("1, 0 ,1\r\n0,1,0\r\n").value(0, 1) == 0);
}

TEST_CASE("CSV errors") {
  CHECK_THROWS_AS(parse("1,0\n1\n"), InputError);
  CHECK_THROWS_AS(parse("1,0\n1,2\n"), InputError);
  CHECK_THROWS_AS(parse("a,b\n"), InputError);
  CHECK_THROWS_AS(parse(""), InputError);
  CHECK_THROWS_AS(parse("1,NA\n0,NA\n"), InputError);
  CHECK_THROWS_AS(parse("NA,NA\n0,1\n"), InputError);
  CHECK_THROWS_AS(io::read_responses_csv("/nonexistent/file.csv"), InputError);
}

TEST_CASE("CSV round trip") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto data = random_responses(9, 4, seed, 0.2);
    for (std::size_t j = 0; j < 9; ++j) data.set(j, 0, 1);
    for (std::size_t i = 0; i < 4; ++i) data.set(0, i, 0);
    std::ostringstream out;
    io::write_responses_csv(out, data);
    CHECK(parse(out.str()) == data);
  }
}

TEST_CASE("double formatting round trips") {
  for (double v : {0.1, -1e-300, 1.0 / 3.0, 12345.678, 6.02214076e23}) {
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK_THROWS_AS(io::parse_double("x1"), InputError);
}

TEST_CASE("state JSON round trip") {
  for (KernelKind kind : {KernelKind::distance, KernelKind::multiplicative, KernelKind::none}) {
    const auto s = random_state(5, 4, 3, kind, Metric::linf, 7);
    const auto back = io::state_from_json(nlohmann::json::parse(io::state_to_json(s).dump()));
    CHECK(back.main.alpha == s.main.alpha);
    CHECK(back.main.beta == s.main.beta);
    CHECK(back.kernel.kind == kind);
    CHECK(back.kernel.metric == Metric::linf);
    CHECK(back.sigma2 == s.sigma2);
    if (kind != KernelKind::none) {
      CHECK(back.latent.respondents == s.latent.respondents);
      CHECK(back.latent.items == s.latent.items);
    }
  }
  CHECK_THROWS_AS(io::state_from_json(nlohmann::json::parse(R"({"alpha": [1]})")), InputError);
}

TEST_CASE("truth records round trip") {
  Rng rng(3);
  const auto ld = generate_local_dependence(20, 6, default_dependence_blocks(20, 6), 2.0, rng);
  const auto back = io::truth_from_json(nlohmann::json::parse(io::truth_to_json(ld.truth).dump()));
  CHECK(back.scenario == "local_dependence");
  CHECK(back.blocks == ld.truth.blocks);
  CHECK(back.boost == 2.0);
  CHECK(back.parameters->main.alpha == ld.truth.parameters->main.alpha);

  const auto tc = generate_two_cluster(10, 6, 2, rng);
  const auto tc_back = io::truth_from_json(io::truth_to_json(tc.truth));
  CHECK_FALSE(tc_back.parameters.has_value());
  CHECK(tc_back.n_random == 2);
}

TEST_CASE("acceptance JSON round trip") {
  AcceptanceCounts a;
  a.alpha = {3, 10};
  a.pos_b = {7, 9};
  const auto back = io::acceptance_from_json(io::acceptance_to_json(a));
  CHECK(back.alpha.accepted == 3);
  CHECK(back.pos_b.proposed == 9);
}

TEST_CASE("traces round trip") {
  const auto data = random_responses(6, 3, 2);
  for (KernelKind kind : {KernelKind::distance, KernelKind::multiplicative, KernelKind::none}) {
    ModelConfig config;
    config.kernel = kind;
    config.metric = Metric::l1;
    const auto result = fit(data, config, ChainSchedule{60, 20, 4, 2, 1});
    std::vector<std::vector<double>> lp;
    for (const auto& c : result.chains) lp.push_back(c.log_posterior);
    std::stringstream buf;
    io::write_traces(buf, result.aligned, lp);
    const auto table = io::read_traces(buf, Metric::l1);
    REQUIRE(table.chains.size() == 2);
    CHECK(table.log_posterior == lp);
    for (std::size_t c = 0; c < 2; ++c) {
      REQUIRE(table.chains[c].size() == result.aligned[c].size());
      for (std::size_t d = 0; d < table.chains[c].size(); ++d) {
        const auto& x = table.chains[c][d];
        const auto& y = result.aligned[c][d];
        CHECK(x.kernel.kind == kind);
        CHECK(x.main.alpha == y.main.alpha);
        CHECK(x.sigma2 == y.sigma2);
        if (kind == KernelKind::distance) CHECK(x.kernel.gamma == y.kernel.gamma);
        if (kind != KernelKind::none) CHECK(x.latent.items == y.latent.items);
      }
    }
  }
}

TEST_CASE("trace parsing errors") {
  std::istringstream empty("");
  CHECK_THROWS_AS(io::read_traces(empty, Metric::l2), InputError);
  std::istringstream bad("x,y,z,w\n");
  CHECK_THROWS_AS(io::read_traces(bad, Metric::l2), InputError);
  std::istringstream ragged("chain,draw,log_posterior,sigma2,alpha[1],beta[1]\n1,1,0,1,0\n");
  CHECK_THROWS_AS(io::read_traces(ragged, Metric::l2), InputError);
}

TEST_CASE("summary JSON and positions CSV") {
  const auto data = random_responses(5, 3, 4);
  const auto result = fit(data, ModelConfig{}, ChainSchedule{40, 20, 1, 2, 2});
  const auto j = io::summary_to_json(result.summary);
  CHECK(j.at("schema") == 1);
  CHECK(j.at("kernel") == "distance");
  CHECK(j.at("parameters").size() == 5 + 3 + 2);
  CHECK(j.at("respondent_positions").size() == 5);

  std::ostringstream pos;
  io::write_positions(pos, result.summary);
  std::istringstream lines(pos.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "id,type,x,y,x_lo,x_hi,y_lo,y_hi");
  int rows = 0;
  for (std::string l; std::getline(lines, l);) ++rows;
  CHECK(rows == 8);
}

TEST_CASE("non-finite diagnostics serialize as null with a status") {
  PosteriorSummary s;
  s.parameters.push_back({"sigma2", {1, 1, 1, 1}, std::numeric_limits<double>::infinity()});
  const auto j = io::summary_to_json(s);
  CHECK(j.at("parameters")[0].at("psrf").is_null());
  CHECK(j.at("parameters")[0].at("psrf_status") == "diverged");
  CHECK(j.dump().find("inf") == std::string::npos);
}

TEST_CASE("selection JSON prints three decimals") {
  SelectionResult r;
  r.inclusion_probability = 0.98765;
  r.chosen_model = ChosenModel::latent_space;
  const auto j = io::selection_to_json(r);
  CHECK(j.at("inclusion_probability_3dp") == "0.988");
  CHECK(j.at("chosen_model") == "latent_space");
}

TEST_CASE("file checksum is stable") {
  const auto path = std::filesystem::temp_directory_path() / "lsirm_checksum_test.txt";
  io::write_text(path, "hello");
  CHECK(io::file_checksum(path) == "a430d84680aabd0b");
  CHECK(io::read_text(path) == "hello");
  std::filesystem::remove(path);
}
