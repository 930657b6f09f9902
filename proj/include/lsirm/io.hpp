#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lsirm/postproc.hpp"
#include "lsirm/ppc.hpp"
#include "lsirm/selection.hpp"
#include "lsirm/simgen.hpp"
#include "lsirm/types.hpp"

namespace lsirm::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Comma-separated 0/1/NA cells, one respondent per line. A first line holding
/// any token other than 0, 1, NA or empty is taken as a header. Empty cells
/// count as missing. Rejects ragged rows, other tokens and rows or columns
/// without observations.
ResponseMatrix parse_responses_csv(std::istream& in);
ResponseMatrix read_responses_csv(const std::filesystem::path& path);
void write_responses_csv(std::ostream& out, const ResponseMatrix& data);

/// Shortest round-trip decimal form.
std::string format_double(double value);
double parse_double(std::string_view text);

json state_to_json(const ParameterState& state);
ParameterState state_from_json(const json& j);

json truth_to_json(const Truth& truth);
Truth truth_from_json(const json& j);

json acceptance_to_json(const AcceptanceCounts& counts);
AcceptanceCounts acceptance_from_json(const json& j);

json summary_to_json(const PosteriorSummary& summary);
json selection_to_json(const SelectionResult& result);
json ppc_to_json(const PpcReport& report);

/// One row per kept draw: chain, draw, log_posterior, gamma (distance kernel),
/// sigma2, alpha[j], beta[i], then a[j][k] and b[i][k] for latent kernels.
void write_traces(std::ostream& out, const std::vector<std::vector<ParameterState>>& chains,
                  const std::vector<std::vector<double>>& log_posterior);

struct TraceTable {
  std::vector<std::vector<ParameterState>> chains;
  std::vector<std::vector<double>> log_posterior;
};

/// Inverse of write_traces. The kernel kind is inferred from the columns;
/// the metric must be supplied.
TraceTable read_traces(std::istream& in, Metric metric);

/// Plot-ready positions: id, type, coordinates and the 95% interval bounds.
void write_positions(std::ostream& out, const PosteriorSummary& summary);

/// FNV-1a 64-bit hash of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

/// Writes text to a file, throwing std::runtime_error on failure.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace lsirm::io
