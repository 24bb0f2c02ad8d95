#pragma once

// Matrix files: a coordinate text format (header "rows cols nnz", then
// 1-indexed "i j value" lines, '%' lines ignored) and dense CSV. Weighted
// least-squares instances pair a coordinate file with a JSON sidecar holding
// w, y, lambda and an optional partition.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qgd/apps.hpp"
#include "qgd/store.hpp"
#include "qgd/types.hpp"

namespace qgd {

/// Malformed input. `line` is 1-based (0 when not tied to a line) and
/// `field` names the offending field.
class ParseError : public InvalidArgument {
 public:
  ParseError(std::string source, std::size_t line, std::string field, const std::string& what);
  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string field_;
};

struct CoordinateFile {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<CoordEntry> entries;  // in file order

  Matrix dense() const;
};

CoordinateFile read_coordinate(std::istream& in, const std::string& source = "<stream>");
CoordinateFile read_coordinate(const std::filesystem::path& path);
/// Writes the nonzero entries column by column, with round-trip precision.
void write_coordinate(std::ostream& out, const Matrix& a);

/// Dense CSV: one row per line, comma separated, no header.
Matrix read_csv(std::istream& in, const std::string& source = "<stream>");
void write_csv(std::ostream& out, const Matrix& a);

/// Picks the format from the extension: .csv is dense, anything else is
/// coordinate.
Matrix read_matrix(const std::filesystem::path& path);
std::string format_matrix(const Matrix& a, const std::filesystem::path& path);

/// A vector given as a CSV file (one value per line or one line of values).
Vector read_vector(const std::filesystem::path& path);

struct WLSFile {
  WLSInstance instance;
  std::optional<PartitionPlan> partition;
};

/// Sidecar keys: "w" (defaults to all ones), "y" (required), "lambda"
/// (defaults to 0) and "partition" (list of 0-based row lists).
WLSFile read_wls(const std::filesystem::path& matrix, const std::filesystem::path& sidecar);
WLSFile parse_wls(const Matrix& x, const std::string& sidecar_text, const std::string& source = "<sidecar>");

/// Writes to a temporary file in the same directory and renames it over
/// `path`, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace qgd
