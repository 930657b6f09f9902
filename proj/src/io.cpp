#include "lsirm/io.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lsirm/error.hpp"

namespace lsirm::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool is_cell_token(std::string_view t) { return t == "0" || t == "1" || t == "NA" || t.empty(); }

json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string psrf_status(double psrf) {
  if (std::isnan(psrf)) return "unavailable";
  if (std::isinf(psrf)) return "diverged";
  return "ok";
}

json matrix_to_json(const PositionMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

PositionMatrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  PositionMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InputError("ragged position matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  return v;
}

std::string coordinate_name(std::size_t k, std::size_t p) {
  static const char* const names[] = {"x", "y", "z"};
  if (p <= 3) return names[k];
  return "d" + std::to_string(k + 1);
}

}  // namespace

json acceptance_to_json(const AcceptanceCounts& a) {
  auto block = [](const BlockCounts& c) {
    return json{{"accepted", c.accepted}, {"proposed", c.proposed}, {"rate", c.rate()}};
  };
  return json{{"alpha", block(a.alpha)},
              {"beta", block(a.beta)},
              {"gamma", block(a.gamma)},
              {"position_a", block(a.pos_a)},
              {"position_b", block(a.pos_b)}};
}

AcceptanceCounts acceptance_from_json(const json& j) {
  auto block = [&j](const char* key) {
    BlockCounts c;
    c.accepted = j.at(key).at("accepted").get<std::uint64_t>();
    c.proposed = j.at(key).at("proposed").get<std::uint64_t>();
    return c;
  };
  try {
    return {block("alpha"), block("beta"), block("gamma"), block("position_a"), block("position_b")};
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed acceptance block: ") + e.what());
  }
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (text == "NaN" || text == "NA") return std::numeric_limits<double>::quiet_NaN();
  if (text == "Inf") return std::numeric_limits<double>::infinity();
  if (text == "-Inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw InputError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

ResponseMatrix parse_responses_csv(std::istream& in) {
  std::vector<std::vector<int>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto tokens = split(line);
    if (first) {
      first = false;
      bool header = false;
      for (auto t : tokens) header = header || !is_cell_token(t);
      width = tokens.size();
      if (header) continue;
    }
    if (tokens.size() != width) {
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " cells, found " + std::to_string(tokens.size()));
    }
    std::vector<int> row;
    row.reserve(width);
    for (auto t : tokens) {
      if (!is_cell_token(t)) {
        throw InputError("line " + std::to_string(line_no) + ": invalid cell '" + std::string(t) +
                         "' (expected 0, 1 or NA)");
      }
      row.push_back(t == "0" ? 0 : t == "1" ? 1 : -1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || width == 0) throw InputError("response file has no data rows");
  Eigen::MatrixXi dense(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  auto data = ResponseMatrix::from_dense(dense);
  data.require_complete_margins();
  return data;
}

ResponseMatrix read_responses_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open response file " + path.string());
  return parse_responses_csv(in);
}

void write_responses_csv(std::ostream& out, const ResponseMatrix& data) {
  for (std::size_t i = 0; i < data.n_items(); ++i) {
    out << (i ? "," : "") << "item" << (i + 1);
  }
  out << '\n';
  for (std::size_t j = 0; j < data.n_respondents(); ++j) {
    for (std::size_t i = 0; i < data.n_items(); ++i) {
      if (i) out << ',';
      if (data.observed(j, i)) {
        out << data.value(j, i);
      } else {
        out << "NA";
      }
    }
    out << '\n';
  }
}

json state_to_json(const ParameterState& s) {
  json j{{"alpha", vector_to_json(s.main.alpha)},
         {"beta", vector_to_json(s.main.beta)},
         {"kernel", std::string(to_string(s.kernel.kind))},
         {"metric", std::string(to_string(s.kernel.metric))},
         {"gamma", s.kernel.gamma},
         {"sigma2", s.sigma2},
         {"delta", s.delta},
         {"omega", s.omega}};
  if (s.uses_positions()) {
    j["respondent_positions"] = matrix_to_json(s.latent.respondents);
    j["item_positions"] = matrix_to_json(s.latent.items);
  }
  return j;
}

ParameterState state_from_json(const json& j) {
  try {
    ParameterState s;
    s.main.alpha = vector_from_json(j.at("alpha"));
    s.main.beta = vector_from_json(j.at("beta"));
    s.kernel.kind = parse_kernel_kind(j.at("kernel").get<std::string>());
    s.kernel.metric = parse_metric(j.at("metric").get<std::string>());
    s.kernel.gamma = j.at("gamma").get<double>();
    s.sigma2 = j.at("sigma2").get<double>();
    s.delta = j.value("delta", 1);
    s.omega = j.value("omega", 0.5);
    if (j.contains("respondent_positions")) {
      s.latent.respondents = matrix_from_json(j.at("respondent_positions"));
      s.latent.items = matrix_from_json(j.at("item_positions"));
    } else {
      s.latent = LatentConfiguration::zeros(s.n_respondents(), s.n_items(), 1);
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed state JSON: ") + e.what());
  }
}

json truth_to_json(const Truth& t) {
  json blocks = json::array();
  for (const auto& b : t.blocks) {
    blocks.push_back({{"respondents", {b.respondent_begin, b.respondent_end}},
                      {"items", {b.item_begin, b.item_end}}});
  }
  json j{{"schema", kSchemaVersion},
         {"scenario", t.scenario},
         {"blocks", blocks},
         {"boost", t.boost},
         {"n_random", t.n_random}};
  j["parameters"] = t.parameters ? state_to_json(*t.parameters) : json(nullptr);
  return j;
}

Truth truth_from_json(const json& j) {
  try {
    Truth t;
    t.scenario = j.at("scenario").get<std::string>();
    for (const auto& b : j.at("blocks")) {
      t.blocks.push_back({b.at("respondents")[0].get<std::size_t>(),
                          b.at("respondents")[1].get<std::size_t>(),
                          b.at("items")[0].get<std::size_t>(), b.at("items")[1].get<std::size_t>()});
    }
    t.boost = j.at("boost").get<double>();
    t.n_random = j.at("n_random").get<std::size_t>();
    if (!j.at("parameters").is_null()) t.parameters = state_from_json(j.at("parameters"));
    return t;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed truth JSON: ") + e.what());
  }
}

json summary_to_json(const PosteriorSummary& s) {
  json params = json::array();
  for (const auto& p : s.parameters) {
    params.push_back({{"name", p.name},
                      {"mean", p.stats.mean},
                      {"median", p.stats.median},
                      {"q025", p.stats.q025},
                      {"q975", p.stats.q975},
                      {"psrf", number_or_null(p.psrf)},
                      {"psrf_status", psrf_status(p.psrf)}});
  }
  auto positions = [](const std::vector<PositionSummary>& v) {
    json out = json::array();
    for (const auto& ps : v) {
      out.push_back({{"id", ps.index + 1},
                     {"mean", vector_to_json(ps.mean)},
                     {"lower", vector_to_json(ps.lower)},
                     {"upper", vector_to_json(ps.upper)}});
    }
    return out;
  };
  const double max_psrf = s.max_psrf();
  return json{{"schema", kSchemaVersion},
              {"kernel", std::string(to_string(s.kernel))},
              {"metric", std::string(to_string(s.metric))},
              {"n_chains", s.n_chains},
              {"n_draws", s.n_draws},
              {"max_psrf", number_or_null(max_psrf)},
              {"max_psrf_status", psrf_status(max_psrf)},
              {"parameters", params},
              {"respondent_positions", positions(s.respondents)},
              {"item_positions", positions(s.items)},
              {"acceptance", acceptance_to_json(s.acceptance)}};
}

json selection_to_json(const SelectionResult& r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", r.inclusion_probability);
  return json{{"schema", kSchemaVersion},
              {"inclusion_probability", r.inclusion_probability},
              {"inclusion_probability_3dp", std::string(buf)},
              {"chosen_model", std::string(to_string(r.chosen_model))},
              {"chain_inclusion", r.chain_inclusion},
              {"gamma_median", r.gamma_median},
              {"psrf_log_gamma", r.psrf_log_gamma ? number_or_null(*r.psrf_log_gamma) : json(nullptr)},
              {"n_draws", r.delta_trace.size()},
              {"acceptance", acceptance_to_json(r.acceptance)},
              {"warnings", r.warnings}};
}

json ppc_to_json(const PpcReport& r) {
  json items = json::array();
  for (std::size_t i = 0; i < r.items.size(); ++i) {
    const auto& c = r.items[i];
    items.push_back({{"item", i + 1},
                     {"observed", c.observed},
                     {"replicated_mean", c.replicated_mean},
                     {"replicated_sd", c.replicated_sd},
                     {"replicated_q025", c.replicated_q025},
                     {"replicated_q975", c.replicated_q975},
                     {"cohen_d", number_or_null(c.cohen_d)},
                     {"undefined", c.undefined},
                     {"inside_interval", c.inside_interval}});
  }
  json flagged = json::array();
  for (auto i : r.flagged_items) flagged.push_back(i + 1);
  return json{{"schema", kSchemaVersion},
              {"n_replications", r.n_replications},
              {"flag_threshold", r.flag_threshold},
              {"coverage", r.coverage()},
              {"flagged_items", flagged},
              {"items", items}};
}

void write_traces(std::ostream& out, const std::vector<std::vector<ParameterState>>& chains,
                  const std::vector<std::vector<double>>& log_posterior) {
  if (chains.empty() || chains.front().empty()) throw InputError("no draws to write");
  const auto& first = chains.front().front();
  const std::size_t n = first.n_respondents(), m = first.n_items();
  const bool positions = first.uses_positions();
  const std::size_t p = positions ? first.latent.dimension() : 0;

  out << "chain,draw,log_posterior";
  if (first.uses_gamma()) out << ",gamma";
  out << ",sigma2";
  for (std::size_t j = 0; j < n; ++j) out << ",alpha[" << j + 1 << ']';
  for (std::size_t i = 0; i < m; ++i) out << ",beta[" << i + 1 << ']';
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < p; ++k) out << ",a[" << j + 1 << "][" << k + 1 << ']';
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < p; ++k) out << ",b[" << i + 1 << "][" << k + 1 << ']';
  out << '\n';

  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t d = 0; d < chains[c].size(); ++d) {
      const auto& s = chains[c][d];
      out << c + 1 << ',' << d + 1 << ',' << format_double(log_posterior[c][d]);
      if (first.uses_gamma()) out << ',' << format_double(s.kernel.gamma);
      out << ',' << format_double(s.sigma2);
      for (double v : s.main.alpha) out << ',' << format_double(v);
      for (double v : s.main.beta) out << ',' << format_double(v);
      for (Eigen::Index j = 0; j < s.latent.respondents.rows() && positions; ++j)
        for (Eigen::Index k = 0; k < s.latent.respondents.cols(); ++k)
          out << ',' << format_double(s.latent.respondents(j, k));
      for (Eigen::Index i = 0; i < s.latent.items.rows() && positions; ++i)
        for (Eigen::Index k = 0; k < s.latent.items.cols(); ++k)
          out << ',' << format_double(s.latent.items(i, k));
      out << '\n';
    }
  }
}

TraceTable read_traces(std::istream& in, Metric metric) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty trace file");
  const auto header_tokens = split(line);
  std::vector<std::string> header(header_tokens.begin(), header_tokens.end());
  if (header.size() < 4 || header[0] != "chain" || header[1] != "draw" ||
      header[2] != "log_posterior") {
    throw InputError("trace file has an unexpected header");
  }
  std::size_t n = 0, m = 0, a_cols = 0;
  bool has_gamma = false;
  for (const auto& h : header) {
    if (h == "gamma") has_gamma = true;
    if (h.rfind("alpha[", 0) == 0) ++n;
    if (h.rfind("beta[", 0) == 0) ++m;
    if (h.rfind("a[", 0) == 0) ++a_cols;
  }
  if (n == 0 || m == 0) throw InputError("trace file lacks alpha or beta columns");
  const std::size_t p = a_cols / n;
  const KernelKind kind = has_gamma ? KernelKind::distance
                          : p > 0   ? KernelKind::multiplicative
                                    : KernelKind::none;
  const std::size_t expected = 3 + (has_gamma ? 1 : 0) + 1 + n + m + (n + m) * p;
  if (header.size() != expected) throw InputError("trace file header has an inconsistent width");

  TraceTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto tok = split(line);
    if (tok.size() != expected) {
      throw InputError("trace line " + std::to_string(line_no) + " has the wrong width");
    }
    const auto chain = static_cast<std::size_t>(parse_double(tok[0]));
    if (chain == 0) throw InputError("chain ids start at 1");
    if (chain > table.chains.size()) {
      table.chains.resize(chain);
      table.log_posterior.resize(chain);
    }
    std::size_t col = 2;
    table.log_posterior[chain - 1].push_back(parse_double(tok[col++]));
    ParameterState s;
    s.kernel.kind = kind;
    s.kernel.metric = metric;
    s.kernel.gamma = has_gamma ? parse_double(tok[col++]) : 0.0;
    s.sigma2 = parse_double(tok[col++]);
    s.main.alpha.resize(static_cast<Eigen::Index>(n));
    s.main.beta.resize(static_cast<Eigen::Index>(m));
    for (auto& v : s.main.alpha) v = parse_double(tok[col++]);
    for (auto& v : s.main.beta) v = parse_double(tok[col++]);
    s.latent = LatentConfiguration::zeros(n, m, std::max<std::size_t>(p, 1));
    for (std::size_t j = 0; j < n && p > 0; ++j)
      for (std::size_t k = 0; k < p; ++k)
        s.latent.respondents(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
            parse_double(tok[col++]);
    for (std::size_t i = 0; i < m && p > 0; ++i)
      for (std::size_t k = 0; k < p; ++k)
        s.latent.items(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            parse_double(tok[col++]);
    table.chains[chain - 1].push_back(std::move(s));
  }
  if (table.chains.empty()) throw InputError("trace file has no draws");
  return table;
}

void write_positions(std::ostream& out, const PosteriorSummary& s) {
  if (s.respondents.empty()) throw InputError("summary has no latent positions");
  const auto p = static_cast<std::size_t>(s.respondents.front().mean.size());
  out << "id,type";
  for (std::size_t k = 0; k < p; ++k) out << ',' << coordinate_name(k, p);
  for (std::size_t k = 0; k < p; ++k) {
    out << ',' << coordinate_name(k, p) << "_lo," << coordinate_name(k, p) << "_hi";
  }
  out << '\n';
  auto rows = [&](const std::vector<PositionSummary>& v, const char* type) {
    for (const auto& ps : v) {
      out << ps.index + 1 << ',' << type;
      for (Eigen::Index k = 0; k < ps.mean.size(); ++k) out << ',' << format_double(ps.mean(k));
      for (Eigen::Index k = 0; k < ps.mean.size(); ++k) {
        out << ',' << format_double(ps.lower(k)) << ',' << format_double(ps.upper(k));
      }
      out << '\n';
    }
  };
  rows(s.respondents, "respondent");
  rows(s.items, "item");
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace lsirm::io
