#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

class Workdir {
 public:
  Workdir() : dir_(fs::temp_directory_path() / ("qgd_cli_test_" + std::to_string(::getpid()))) {
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  fs::path operator/(const std::string& name) const { return dir_ / name; }

  Run run(const std::string& args) const {
    const fs::path out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = "env -u QGD_OUTPUT_DIR " + std::string(QGD_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

 private:
  fs::path dir_;
};

}  // namespace

TEST_CASE("identity solve returns the basis vector") {
  Workdir w;
  REQUIRE(w.run("gen --family identity --n 4 --matrix " + (w / "id.mtx").string()).code == 0);
  const Run r = w.run("solve " + (w / "id.mtx").string() + " --b e1");
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["command"] == "solve");
  const auto z = j["result"]["z"];
  CHECK(z[0].get<double>() == doctest::Approx(1.0));
  for (int i = 1; i < 4; ++i) CHECK(std::abs(z[i].get<double>()) <= 1e-12);
}

TEST_CASE("gd on diag(1, 1/2) lands near the solution") {
  Workdir w;
  w.write("d.csv", "1,0\n0,0.5\n");
  const Run r = w.run("gd " + (w / "d.csv").string() + " --b v:1,1 --alpha 0.5 --csv " + (w / "gd.csv").string());
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["result"]["distance"].get<double>() <= 0.1);
  for (const auto& b : j["bounds"]) CHECK(b.contains("formula"));
  const std::string csv = Workdir::slurp(w / "gd.csv");
  CHECK(csv.rfind("index,z,reference\n", 0) == 0);
}

TEST_CASE("malformed input exits with code 2 and a located error") {
  Workdir w;
  w.write("bad.mtx", "2 2 1\n1 x 3\n");
  const Run r = w.run("stats " + (w / "bad.mtx").string());
  CHECK(r.code == 2);
  const Json e = Json::parse(r.err);
  CHECK(e["error"]["line"] == 2);
  CHECK(e["error"]["field"] == "j");
  CHECK(w.run("stats").code == 2);
  CHECK(w.run("gd " + (w / "bad.mtx").string() + " --alpha 2").code == 2);
}

TEST_CASE("reports are reproducible apart from the timestamp") {
  Workdir w;
  w.write("d.csv", "1,0\n0,0.5\n");
  const std::string args = "--seed 9 sve " + (w / "d.csv").string() + " --x v:1,1";
  Json a = Json::parse(w.run(args).out);
  Json b = Json::parse(w.run(args).out);
  CHECK(a["generated_at"].is_string());
  a.erase("generated_at");
  b.erase("generated_at");
  CHECK(a == b);
}

TEST_CASE("output directory from the environment") {
  Workdir w;
  w.write("d.csv", "1,0\n0,0.5\n");
  const std::string cmd = "QGD_OUTPUT_DIR=" + (w / "").string() + " " + QGD_CLI_PATH + " stats " + (w / "d.csv").string();
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(w / "stats.json"));
  CHECK(Workdir::slurp(w / "stats.csv").rfind("name,rows,cols,nnz", 0) == 0);
}

TEST_CASE("least squares and mini-batch commands") {
  Workdir w;
  w.write("x.csv", "1,0.2\n0.1,1\n1,1\n0.5,-0.3\n");
  w.write("side.json", R"({"y": [1, 0.5, 1.5, 0.2], "lambda": 0.1})");
  const std::string files = (w / "x.csv").string() + " " + (w / "side.json").string();
  const Run wls = w.run("wls " + files + " --alpha 0.5");
  REQUIRE(wls.code == 0);
  CHECK(Json::parse(wls.out)["result"]["distance"].get<double>() <= 0.1);
  const Run sgd = w.run("sgd " + files + " --alpha 0.2 --tau 127 --batches 2");
  REQUIRE(sgd.code == 0);
  CHECK(Json::parse(sgd.out)["config"]["batches"].size() == 2);
  CHECK(w.run("sgd " + files).code == 2);
}
