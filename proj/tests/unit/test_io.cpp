#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "qgd/io.hpp"

using namespace qgd;

namespace {

template <class F>
ParseError capture(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError("", 0, "", "");
}

}  // namespace

TEST_CASE("coordinate round trip") {
  Matrix a(3, 2);
  a << 1.0 / 3.0, 0, 0, -2.5, 1e-7, 0;
  std::ostringstream out;
  write_coordinate(out, a);
  std::istringstream in(out.str());
  const CoordinateFile f = read_coordinate(in);
  CHECK(f.rows == 3);
  CHECK(f.cols == 2);
  CHECK(f.entries.size() == 3);
  CHECK((f.dense() - a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coordinate errors name the line and field") {
  {
    std::istringstream in("% comment\n2 2 1\n1 x 3\n");
    const ParseError e = capture([&] { read_coordinate(in, "m.mtx"); });
    CHECK(e.line() == 3);
    CHECK(e.field() == "j");
    CHECK(std::string(e.what()).find("m.mtx:3") != std::string::npos);
  }
  {
    std::istringstream in("2 2 1\n3 1 1.0\n");
    const ParseError e = capture([&] { read_coordinate(in); });
    CHECK(e.line() == 2);
    CHECK(e.field() == "i");
  }
  {
    std::istringstream in("2 2 2\n1 1 1.0\n");
    CHECK(capture([&] { read_coordinate(in); }).field() == "nnz");
  }
  {
    std::istringstream in("2 2\n");
    CHECK(capture([&] { read_coordinate(in); }).field() == "header");
  }
}

TEST_CASE("csv") {
  std::istringstream in("1,2\n3,4\n");
  const Matrix a = read_csv(in);
  CHECK(a(1, 0) == 3.0);
  std::istringstream ragged("1,2\n3\n");
  const ParseError e = capture([&] { read_csv(ragged); });
  CHECK(e.line() == 2);
  CHECK(e.field() == "row");
}

TEST_CASE("least-squares sidecar") {
  const Matrix x = Matrix::Identity(2, 2);
  const WLSFile f = parse_wls(x, R"({"y": [1, 2], "lambda": 0.5, "partition": [[0], [1]]})");
  CHECK(f.instance.w == Vector::Ones(2));
  CHECK(f.instance.lambda == 0.5);
  REQUIRE(f.partition.has_value());
  CHECK(f.partition->k() == 2);
  CHECK(capture([&] { parse_wls(x, R"({"w": [1, 1]})"); }).field() == "y");
  CHECK(capture([&] { parse_wls(x, R"({"y": [1, 2, 3]})"); }).field() == "y");
  CHECK(capture([&] { parse_wls(x, R"({"y": [1, "a"]})"); }).field() == "y[1]");
  CHECK(capture([&] { parse_wls(x, "{nope"); }).field() == "json");
}

TEST_CASE("atomic write and matrix formats") {
  const auto dir = std::filesystem::temp_directory_path() / "qgd_io_test";
  std::filesystem::create_directories(dir);
  Matrix a(2, 2);
  a << 1, 0, 0, 0.5;
  for (const char* name : {"a.csv", "a.mtx"}) {
    const auto path = dir / name;
    write_atomic(path, format_matrix(a, path));
    CHECK((read_matrix(path) - a).cwiseAbs().maxCoeff() == 0.0);
  }
  std::filesystem::remove_all(dir);
  CHECK(capture([&] { read_matrix(dir / "missing.mtx"); }).field() == "path");
}
