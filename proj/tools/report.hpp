#pragma once

// Report emission for the command line tool: a versioned JSON document plus a
// fixed-column CSV table per subcommand.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgd/apps.hpp"
#include "qgd/matvec.hpp"
#include "qgd/solvers.hpp"
#include "qgd/sve.hpp"

namespace qgd::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

/// A bound check: the measured value, the bound and the formula behind it.
Json bound_entry(const std::string& name, double measured, double bound, const std::string& formula);

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  Json config = Json::object();
  Json result = Json::object();
  Json bounds = Json::array();
  Table table;

  /// Deterministic given command, seed, config and result; the timestamp
  /// sits in its own top-level field.
  Json to_json(const std::optional<std::string>& generated_at) const;
};

Json to_json(const Vector& v);
Json to_json(const MatrixStats& s);
Json to_json(const SveOutcome& o);
Json to_json(const SolveReport& r);
Json to_json(const SpectralNormResult& r);
Json to_json(const HistoryResult& h);
Json to_json(const AppReport& r);

Table vector_table(const Vector& z, const Vector& reference);

std::string number(double v);
std::string utc_timestamp();

}  // namespace qgd::cli
