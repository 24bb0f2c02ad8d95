// qgd: batch driver for the store, SVE, solvers and gradient-descent
// applications. Reports go to --output/--csv, to $QGD_OUTPUT_DIR, or to
// stdout. Exit codes: 0 success, 2 malformed input or arguments, 3 numerical
// or capacity failure, 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qgd/apps.hpp"
#include "qgd/generate.hpp"
#include "qgd/io.hpp"
#include "qgd/matvec.hpp"
#include "qgd/solvers.hpp"
#include "qgd/store.hpp"
#include "qgd/sve.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using namespace qgd;
using qgd::cli::Json;
using qgd::cli::Report;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitOther = 1;

struct Common {
  std::uint64_t seed = kDefaultSeed;
  std::string output;
  std::string csv;
  bool no_timestamp = false;
};

struct Options {
  std::string input;
  std::string sidecar;
  std::string vector = "ones";
  double p = 0.5;
  std::vector<double> p_grid;
  double delta = 0.05;
  double epsilon = 0.05;
  double epsilon1 = 0.01;
  double delta_rel = 0.1;
  double alpha = 0.01;
  double kappa = 0.0;
  std::size_t tau = 0;
  std::size_t batches = 0;
  std::string mode = "analytic";
  int reps = kDefaultReps;
  // gen
  std::string family;
  std::size_t n = 4;
  std::size_t m = 0;
  std::size_t rank = 2;
  double perturbation = 0.01;
  double gen_kappa = 4.0;
  std::vector<double> diagonal;
};

// "ones", "e<k>" (1-based basis vector), "v:1,2,3", or a CSV path.
Vector parse_vector(const std::string& text, std::size_t n) {
  const auto len = static_cast<Eigen::Index>(n);
  if (text == "ones") return Vector::Ones(len) / std::sqrt(static_cast<double>(n));
  if (text.size() > 1 && text[0] == 'e' && text.find_first_not_of("0123456789", 1) == std::string::npos) {
    const std::size_t k = std::stoul(text.substr(1));
    if (k < 1 || k > n) throw ParseError(text, 0, "vector", "basis index out of range 1.." + std::to_string(n));
    return Vector::Unit(len, static_cast<Eigen::Index>(k - 1));
  }
  Vector v;
  if (text.rfind("v:", 0) == 0) {
    std::istringstream in(text.substr(2));
    v = read_csv(in, "vector").reshaped();
  } else {
    v = read_vector(text);
  }
  if (v.size() != len) {
    throw ParseError(text, 0, "vector", "has " + std::to_string(v.size()) + " entries, expected " + std::to_string(n));
  }
  return v;
}

SveConfig sve_config(const Options& o, double delta) { return {delta, parse_sve_mode(o.mode), o.reps}; }

AppConfig app_config(const Options& o) {
  AppConfig c;
  c.delta = o.delta;
  c.alpha = o.alpha;
  c.tau = o.tau;
  if (o.kappa > 0.0) c.kappa = o.kappa;
  c.norm_epsilon = o.epsilon;
  c.p = o.p;
  c.mode = parse_sve_mode(o.mode);
  c.reps = o.reps;
  return c;
}

Json app_config_json(const AppConfig& c) {
  return Json{{"delta", c.delta},   {"alpha", c.alpha}, {"tau", c.tau},       {"kappa", c.kappa ? Json(*c.kappa) : Json(nullptr)},
              {"norm_epsilon", c.norm_epsilon}, {"p", c.p}, {"mode", to_string(c.mode)}, {"reps", c.reps}};
}

Json app_bounds(const AppReport& r) {
  Json b = Json::array();
  b.push_back(cli::bound_entry("output_distance", r.distance, r.bound, r.bound_formula));
  b.push_back(cli::bound_entry("ledger", r.ledger_error, r.ledger_bound, "alpha*tau^2*epsilon"));
  b.push_back(cli::bound_entry("state_ledger", r.state_error, r.state_bound, "sqrt(2)*alpha*tau^2*epsilon/||theta_tau||"));
  return b;
}

Report cmd_ingest(const Options& o) {
  const CoordinateFile f = read_coordinate(fs::path(o.input));
  const MatrixStore store = MatrixStore::from_stream(f.entries, f.rows, f.cols);
  Report r;
  r.config = Json{{"input", o.input}};
  r.result = Json{{"rows", store.rows()},           {"cols", store.cols()},
                  {"inserts", store.inserts()},     {"total_touches", store.total_touches()},
                  {"max_touches", store.max_touches()}, {"touch_limit", store.touch_limit()},
                  {"max_norm_sq", store.max_norm_sq()}, {"store", Json::parse(store.to_json())}};
  r.bounds.push_back(cli::bound_entry("touches_per_insert", static_cast<double>(store.max_touches()),
                                      static_cast<double>(store.touch_limit()), "ceil(log2(n))+2"));
  r.table = {{"rows", "cols", "inserts", "total_touches", "max_touches", "touch_limit", "max_norm_sq"},
             {{std::to_string(store.rows()), std::to_string(store.cols()), std::to_string(store.inserts()),
               std::to_string(store.total_touches()), std::to_string(store.max_touches()),
               std::to_string(store.touch_limit()), cli::number(store.max_norm_sq())}}};
  return r;
}

Report cmd_stats(const Options& o) {
  const Matrix a = read_matrix(o.input);
  const std::vector<double> grid = o.p_grid.empty() ? default_p_grid() : o.p_grid;
  const MatrixStats s = matrix_stats(a, grid);
  const MuResult mu_r = mu(a, grid);
  std::size_t nnz = static_cast<std::size_t>((a.array() != 0.0).count());
  Report r;
  r.config = Json{{"input", o.input}, {"p_grid", grid}};
  r.result = cli::to_json(s);
  r.result["nnz"] = nnz;
  r.result["mu"] = mu_r.value;
  r.result["mu_p"] = mu_r.p ? Json(*mu_r.p) : Json(nullptr);
  r.bounds.push_back(cli::bound_entry("mu_vs_frobenius", mu_r.value, s.frobenius, "||A||_F"));
  r.table = {{"name", "rows", "cols", "nnz", "frobenius", "spectral", "kappa", "sparsity", "s1", "mu", "mu_p"},
             {{fs::path(o.input).filename().string(), std::to_string(a.rows()), std::to_string(a.cols()),
               std::to_string(nnz), cli::number(s.frobenius), cli::number(s.spectral),
               s.kappa ? cli::number(*s.kappa) : "", std::to_string(s.sparsity), cli::number(s.s1),
               cli::number(mu_r.value), mu_r.p ? cli::number(*mu_r.p) : "frobenius"}}};
  return r;
}

Report cmd_sve(const Options& o, Rng& rng) {
  const Matrix a = read_matrix(o.input);
  const Vector x = parse_vector(o.vector, static_cast<std::size_t>(a.cols()));
  const WalkOperator walk = build_walk(StorePair::from_matrix(a, o.p));
  const SveOutcome out = sve(walk, x, sve_config(o, o.delta), rng);
  Report r;
  r.config = Json{{"input", o.input}, {"x", o.vector}, {"p", o.p}, {"delta", o.delta}, {"mode", o.mode}, {"reps", o.reps}};
  r.result = cli::to_json(out);
  double worst = 0.0;
  r.table.columns = {"index", "beta", "sigma", "estimate", "success"};
  for (std::size_t i = 0; i < out.components.size(); ++i) {
    const auto& c = out.components[i];
    worst = std::max(worst, std::abs(c.estimate - c.sigma));
    r.table.rows.push_back({std::to_string(i + 1), cli::number(c.beta), cli::number(c.sigma), cli::number(c.estimate),
                            c.success ? "1" : "0"});
  }
  r.bounds.push_back(cli::bound_entry("sve_precision", worst, o.delta, "delta"));
  return r;
}

double kappa_for(const Options& o, const Matrix& a) {
  if (o.kappa > 0.0) return o.kappa;
  const MatrixStats s = matrix_stats(a);
  if (!s.kappa) throw InvalidArgument("cannot infer kappa for a zero matrix; pass --kappa");
  return *s.kappa;
}

Report cmd_rotate(const Options& o, Rng& rng, bool invert) {
  const Matrix a = read_matrix(o.input);
  const Vector x = parse_vector(o.vector, static_cast<std::size_t>(a.cols()));
  const WalkOperator walk = build_walk(StorePair::from_matrix(a, o.p));
  const double kappa = kappa_for(o, a);
  const SolveReport rep = invert ? solve(walk, x, o.epsilon1, kappa, sve_config(o, o.epsilon1), rng)
                                 : multiply(walk, x, o.epsilon1, kappa, sve_config(o, o.epsilon1), rng);
  Report r;
  r.config = Json{{"input", o.input}, {"vector", o.vector}, {"p", o.p}, {"epsilon1", o.epsilon1}, {"kappa", kappa},
                  {"mode", o.mode}, {"reps", o.reps}};
  r.result = cli::to_json(rep);
  r.bounds.push_back(cli::bound_entry("output_distance", rep.distance, rep.bound, rep.bound_formula));
  r.table = cli::vector_table(rep.z, rep.reference);
  return r;
}

Report cmd_gd(const Options& o, Rng& rng) {
  const Matrix a = read_matrix(o.input);
  const Vector b = parse_vector(o.vector, static_cast<std::size_t>(a.cols()));
  const AppConfig cfg = app_config(o);
  const AppReport rep = gd_linear_solve(a, b, cfg, rng);
  Report r;
  r.config = app_config_json(cfg);
  r.config["input"] = o.input;
  r.config["b"] = o.vector;
  r.result = cli::to_json(rep);
  r.bounds = app_bounds(rep);
  r.table = cli::vector_table(rep.z, rep.reference);
  return r;
}

Report cmd_wls(const Options& o, Rng& rng, bool stochastic) {
  const WLSFile f = read_wls(o.input, o.sidecar);
  const AppConfig cfg = app_config(o);
  Report r;
  r.config = app_config_json(cfg);
  r.config["input"] = o.input;
  r.config["sidecar"] = o.sidecar;
  AppReport rep;
  if (stochastic) {
    PartitionPlan plan;
    if (f.partition) {
      plan = *f.partition;
    } else {
      if (o.batches == 0) throw InvalidArgument("sgd needs a partition in the sidecar or --batches");
      plan = PartitionPlan::random(f.instance.m(), o.batches, rng);
    }
    r.config["batches"] = plan.batches;
    rep = sgd_solve(f.instance, plan, cfg, rng);
  } else {
    rep = wls_solve(f.instance, cfg, rng);
  }
  r.result = cli::to_json(rep);
  r.bounds = app_bounds(rep);
  r.table = cli::vector_table(rep.z, rep.reference);
  return r;
}

Report cmd_specnorm(const Options& o, Rng& rng) {
  const Matrix a = read_matrix(o.input);
  const SpectralNormResult res = spectral_norm_estimate(a, o.epsilon, o.delta_rel, sve_config(o, o.epsilon), rng);
  Report r;
  r.config = Json{{"input", o.input}, {"epsilon", o.epsilon}, {"delta_rel", o.delta_rel}, {"mode", o.mode}, {"reps", o.reps}};
  r.result = cli::to_json(res);
  r.bounds.push_back(cli::bound_entry("eta_error", std::abs(res.estimate - res.eta), o.epsilon, "epsilon"));
  r.table.columns = {"round", "l", "u", "tau", "mass", "estimate"};
  for (std::size_t k = 0; k < res.trace.size(); ++k) {
    const auto& t = res.trace[k];
    r.table.rows.push_back({std::to_string(k + 1), cli::number(t.l), cli::number(t.u), cli::number(t.tau),
                            cli::number(t.mass), cli::number(t.estimate)});
  }
  return r;
}

Report cmd_gen(const Options& o, const Common& c, Rng& rng) {
  GenParams gp;
  gp.n = o.n;
  gp.m = o.m;
  gp.kappa = o.gen_kappa;
  gp.rank = o.rank;
  gp.perturbation = o.perturbation;
  gp.diagonal = o.diagonal;
  const Family fam = parse_family(o.family);
  const Matrix a = generate(fam, gp, rng);
  Report r;
  r.config = Json{{"family", o.family}, {"n", o.n}, {"m", o.m == 0 ? o.n : o.m}, {"kappa", o.gen_kappa},
                  {"rank", o.rank}, {"perturbation", o.perturbation}};
  const MatrixStats s = matrix_stats(a);
  r.result = cli::to_json(s);
  if (!o.input.empty()) {
    write_atomic(o.input, format_matrix(a, o.input));
    r.result["written"] = o.input;
  } else if (c.output.empty()) {
    // No matrix path: the matrix itself goes to stdout.
    std::ostringstream ss;
    write_coordinate(ss, a);
    std::cout << ss.str();
    r.result["written"] = nullptr;
  }
  r.table = {{"family", "rows", "cols", "frobenius", "spectral", "s1", "sparsity"},
             {{o.family, std::to_string(a.rows()), std::to_string(a.cols()), cli::number(s.frobenius),
               cli::number(s.spectral), cli::number(s.s1), std::to_string(s.sparsity)}}};
  return r;
}

void emit(const Report& r, const Common& c, bool matrix_on_stdout) {
  const std::optional<std::string> stamp =
      c.no_timestamp ? std::nullopt : std::optional<std::string>(cli::utc_timestamp());
  const std::string json = r.to_json(stamp).dump(2) + "\n";
  std::string out = c.output, csv = c.csv;
  if (out.empty()) {
    if (const char* dir = std::getenv("QGD_OUTPUT_DIR"); dir && *dir) {
      out = (fs::path(dir) / (r.command + ".json")).string();
      if (csv.empty()) csv = (fs::path(dir) / (r.command + ".csv")).string();
    }
  }
  if (!out.empty()) {
    write_atomic(out, json);
  } else if (!matrix_on_stdout) {
    std::cout << json;
  }
  if (!csv.empty()) write_atomic(csv, r.table.to_csv());
}

Json error_record(const std::string& type, const std::string& message) {
  return Json{{"schema_version", cli::kSchemaVersion}, {"error", Json{{"type", type}, {"message", message}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum gradient descent simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  Options o;
  app.add_option("--seed", common.seed, "RNG seed")->capture_default_str();
  app.add_option("--output", common.output, "JSON report path (default: $QGD_OUTPUT_DIR/<command>.json or stdout)");
  app.add_option("--csv", common.csv, "CSV table path (default: $QGD_OUTPUT_DIR/<command>.csv)");
  app.add_flag("--no-timestamp", common.no_timestamp, "Leave generated_at null");

  auto add_input = [&](CLI::App* s) { s->add_option("input", o.input, "Matrix file (.csv dense, otherwise coordinate)")->required(); };
  auto add_mode = [&](CLI::App* s) {
    s->add_option("--mode", o.mode, "SVE mode: analytic, exact-circuit or oracle")->capture_default_str();
    s->add_option("--reps", o.reps, "Phase-estimation repetitions (median)")->capture_default_str();
    s->add_option("--p", o.p, "Walk factorization exponent in [0, 1]")->capture_default_str();
  };
  auto add_vector = [&](CLI::App* s, const std::string& name) {
    s->add_option(name, o.vector, "Vector: ones, e<k>, v:<comma list> or a CSV path")->capture_default_str();
  };
  auto add_app = [&](CLI::App* s) {
    s->add_option("--delta", o.delta, "Target error; output within 2 delta")->capture_default_str();
    s->add_option("--alpha", o.alpha, "Step size")->capture_default_str();
    s->add_option("--kappa", o.kappa, "Condition bound of the normalized matrix (default: computed)");
    s->add_option("--tau", o.tau, "Step count (default: ceil(kappa ln(kappa/delta)/alpha))");
    s->add_option("--norm-epsilon", o.epsilon, "Spectral-norm precision for normalization")->capture_default_str();
    add_mode(s);
  };

  auto* ingest = app.add_subcommand("ingest", "Build a store from a coordinate file");
  add_input(ingest);
  auto* stats = app.add_subcommand("stats", "mu, norms, s_1 and sparsity of a matrix");
  add_input(stats);
  stats->add_option("--p-grid", o.p_grid, "Exponents p for mu_p and s_p");
  auto* sve_cmd = app.add_subcommand("sve", "Singular value estimation of a vector");
  add_input(sve_cmd);
  add_vector(sve_cmd, "--x");
  sve_cmd->add_option("--delta", o.delta, "Precision")->capture_default_str();
  add_mode(sve_cmd);
  auto* mul_cmd = app.add_subcommand("multiply", "|Ax> for psd A");
  add_input(mul_cmd);
  add_vector(mul_cmd, "--x");
  auto* solve_cmd = app.add_subcommand("solve", "|A^-1 b> for psd A");
  add_input(solve_cmd);
  add_vector(solve_cmd, "--b");
  for (auto* s : {mul_cmd, solve_cmd}) {
    s->add_option("--epsilon1", o.epsilon1, "SVE precision")->capture_default_str();
    s->add_option("--kappa", o.kappa, "Condition bound (default: computed)");
    add_mode(s);
  }
  auto* gd_cmd = app.add_subcommand("gd", "Linear system by gradient descent");
  add_input(gd_cmd);
  add_vector(gd_cmd, "--b");
  add_app(gd_cmd);
  auto* wls_cmd = app.add_subcommand("wls", "Weighted least squares");
  auto* sgd_cmd = app.add_subcommand("sgd", "Cyclic mini-batch gradient descent");
  for (auto* s : {wls_cmd, sgd_cmd}) {
    add_input(s);
    s->add_option("sidecar", o.sidecar, "JSON with y, w, lambda and optional partition")->required();
    add_app(s);
  }
  sgd_cmd->add_option("--batches", o.batches, "Seeded random equal split into k batches when the sidecar has none");
  auto* spec_cmd = app.add_subcommand("specnorm", "Estimate sigma_max / ||A||_F");
  add_input(spec_cmd);
  spec_cmd->add_option("--epsilon", o.epsilon, "Additive precision")->capture_default_str();
  spec_cmd->add_option("--delta-rel", o.delta_rel, "Relative precision of amplitude estimation")->capture_default_str();
  spec_cmd->add_option("--mode", o.mode, "SVE mode")->capture_default_str();
  spec_cmd->add_option("--reps", o.reps, "Repetitions")->capture_default_str();
  auto* gen_cmd = app.add_subcommand("gen", "Generate a matrix");
  gen_cmd->add_option("--family", o.family, "identity, diag, random-psd, low-rank, perturbed-permutation, sign")->required();
  gen_cmd->add_option("--n", o.n, "Columns")->capture_default_str();
  gen_cmd->add_option("--m", o.m, "Rows (default: n)");
  gen_cmd->add_option("--kappa", o.gen_kappa, "Condition number for diag and random-psd")->capture_default_str();
  gen_cmd->add_option("--rank", o.rank, "Rank for low-rank")->capture_default_str();
  gen_cmd->add_option("--perturbation", o.perturbation, "Perturbation size")->capture_default_str();
  gen_cmd->add_option("--diagonal", o.diagonal, "Explicit diagonal for diag");
  gen_cmd->add_option("--matrix", o.input, "Where to write the matrix (.csv dense, otherwise coordinate)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_record("usage", e.what()).dump() << "\n";
    return kExitInput;
  }

  try {
    Rng rng(common.seed);
    Report r;
    bool matrix_on_stdout = false;
    if (ingest->parsed()) r = cmd_ingest(o);
    else if (stats->parsed()) r = cmd_stats(o);
    else if (sve_cmd->parsed()) r = cmd_sve(o, rng);
    else if (mul_cmd->parsed()) r = cmd_rotate(o, rng, false);
    else if (solve_cmd->parsed()) r = cmd_rotate(o, rng, true);
    else if (gd_cmd->parsed()) r = cmd_gd(o, rng);
    else if (wls_cmd->parsed()) r = cmd_wls(o, rng, false);
    else if (sgd_cmd->parsed()) r = cmd_wls(o, rng, true);
    else if (spec_cmd->parsed()) r = cmd_specnorm(o, rng);
    else {
      matrix_on_stdout = o.input.empty() && common.output.empty();
      r = cmd_gen(o, common, rng);
    }
    r.command = app.get_subcommands().front()->get_name();
    r.seed = common.seed;
    emit(r, common, matrix_on_stdout);
    return 0;
  } catch (const ParseError& e) {
    Json rec = error_record("parse", e.what());
    rec["error"]["source"] = e.source();
    rec["error"]["line"] = e.line();
    rec["error"]["field"] = e.field();
    std::cerr << rec.dump() << "\n";
    return kExitInput;
  } catch (const InvalidArgument& e) {
    std::cerr << error_record("invalid_argument", e.what()).dump() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << error_record("numerical", e.what()).dump() << "\n";
    return kExitNumeric;
  } catch (const CapacityError& e) {
    std::cerr << error_record("capacity", e.what()).dump() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << error_record("internal", e.what()).dump() << "\n";
    return kExitOther;
  }
}
