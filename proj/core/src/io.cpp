#include "qgd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace qgd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (sep == ' ') {
    std::istringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
  }
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& tok, const std::string& source, std::size_t line, const std::string& field) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (tok.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ParseError(source, line, field, "'" + tok + "' is not a number");
  }
  if (!std::isfinite(v)) throw ParseError(source, line, field, "value is not finite");
  return v;
}

std::size_t parse_index(const std::string& tok, const std::string& source, std::size_t line, const std::string& field) {
  std::size_t v = 0;
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (tok.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ParseError(source, line, field, "'" + tok + "' is not a nonnegative integer");
  }
  return v;
}

std::string number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return ss.str();
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "path", "cannot open file");
  return in;
}

Vector json_vector(const nlohmann::json& j, const std::string& key, const std::string& source) {
  if (!j.is_array()) throw ParseError(source, 0, key, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(source, 0, key + "[" + std::to_string(i) + "]", "expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace

ParseError::ParseError(std::string source, std::size_t line, std::string field, const std::string& what)
    : InvalidArgument(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + field + ": " + what),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

Matrix CoordinateFile::dense() const {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (const auto& e : entries) a(static_cast<Eigen::Index>(e.i - 1), static_cast<Eigen::Index>(e.j - 1)) = e.value;
  return a;
}

CoordinateFile read_coordinate(std::istream& in, const std::string& source) {
  CoordinateFile out;
  std::string raw;
  std::size_t line = 0;
  std::size_t nnz = 0;
  bool header = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '%') continue;
    const auto tok = split(s, ' ');
    if (!header) {
      if (tok.size() != 3) throw ParseError(source, line, "header", "expected 'rows cols nnz'");
      out.rows = parse_index(tok[0], source, line, "rows");
      out.cols = parse_index(tok[1], source, line, "cols");
      nnz = parse_index(tok[2], source, line, "nnz");
      if (out.rows == 0 || out.cols == 0) throw ParseError(source, line, "header", "dimensions must be positive");
      header = true;
      continue;
    }
    if (tok.size() != 3) throw ParseError(source, line, "entry", "expected 'i j value'");
    const std::size_t i = parse_index(tok[0], source, line, "i");
    const std::size_t j = parse_index(tok[1], source, line, "j");
    if (i < 1 || i > out.rows) throw ParseError(source, line, "i", "row index out of range 1.." + std::to_string(out.rows));
    if (j < 1 || j > out.cols) throw ParseError(source, line, "j", "column index out of range 1.." + std::to_string(out.cols));
    out.entries.push_back({i, j, parse_double(tok[2], source, line, "value")});
  }
  if (!header) throw ParseError(source, line, "header", "missing 'rows cols nnz' line");
  if (out.entries.size() != nnz) {
    throw ParseError(source, line, "nnz",
                     "header declares " + std::to_string(nnz) + " entries, found " + std::to_string(out.entries.size()));
  }
  return out;
}

CoordinateFile read_coordinate(const std::filesystem::path& path) {
  auto in = open(path);
  return read_coordinate(in, path.string());
}

void write_coordinate(std::ostream& out, const Matrix& a) {
  std::size_t nnz = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) nnz += a(i, j) != 0.0 ? 1 : 0;
  }
  out << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << number(a(i, j)) << '\n';
    }
  }
}

Matrix read_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '%' || s[0] == '#') continue;
    const auto tok = split(s, ',');
    std::vector<double> row;
    for (std::size_t c = 0; c < tok.size(); ++c) {
      row.push_back(parse_double(tok[c], source, line, "column " + std::to_string(c + 1)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(source, line, "row", "expected " + std::to_string(rows.front().size()) + " columns, found " +
                                                std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source, line, "matrix", "no rows");
  Matrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return a;
}

void write_csv(std::ostream& out, const Matrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out << (j ? "," : "") << number(a(i, j));
    out << '\n';
  }
}

Matrix read_matrix(const std::filesystem::path& path) {
  auto in = open(path);
  if (path.extension() == ".csv") return read_csv(in, path.string());
  return read_coordinate(in, path.string()).dense();
}

std::string format_matrix(const Matrix& a, const std::filesystem::path& path) {
  std::ostringstream ss;
  if (path.extension() == ".csv") {
    write_csv(ss, a);
  } else {
    write_coordinate(ss, a);
  }
  return ss.str();
}

Vector read_vector(const std::filesystem::path& path) {
  auto in = open(path);
  const Matrix a = read_csv(in, path.string());
  if (a.rows() != 1 && a.cols() != 1) throw ParseError(path.string(), 0, "vector", "expected a single row or column");
  return a.reshaped();
}

WLSFile parse_wls(const Matrix& x, const std::string& sidecar_text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(sidecar_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, "json", e.what());
  }
  if (!j.is_object()) throw ParseError(source, 0, "json", "expected an object");
  WLSFile out;
  out.instance.x = x;
  if (!j.contains("y")) throw ParseError(source, 0, "y", "missing");
  out.instance.y = json_vector(j["y"], "y", source);
  out.instance.w = j.contains("w") ? json_vector(j["w"], "w", source) : Vector::Ones(x.rows());
  if (j.contains("lambda")) {
    if (!j["lambda"].is_number()) throw ParseError(source, 0, "lambda", "expected a number");
    out.instance.lambda = j["lambda"].get<double>();
  }
  if (out.instance.y.size() != x.rows()) throw ParseError(source, 0, "y", "length must equal the number of rows of X");
  if (out.instance.w.size() != x.rows()) throw ParseError(source, 0, "w", "length must equal the number of rows of X");
  if (j.contains("partition")) {
    const auto& p = j["partition"];
    if (!p.is_array()) throw ParseError(source, 0, "partition", "expected a list of row lists");
    PartitionPlan plan;
    for (std::size_t b = 0; b < p.size(); ++b) {
      const std::string field = "partition[" + std::to_string(b) + "]";
      if (!p[b].is_array()) throw ParseError(source, 0, field, "expected a list of row indices");
      std::vector<std::size_t> rows;
      for (const auto& r : p[b]) {
        if (!r.is_number_unsigned()) throw ParseError(source, 0, field, "row indices must be nonnegative integers");
        rows.push_back(r.get<std::size_t>());
      }
      plan.batches.push_back(std::move(rows));
    }
    out.partition = std::move(plan);
  }
  return out;
}

WLSFile read_wls(const std::filesystem::path& matrix, const std::filesystem::path& sidecar) {
  return parse_wls(read_matrix(matrix), read_file(sidecar), sidecar.string());
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::create_directories(dir);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qgd
