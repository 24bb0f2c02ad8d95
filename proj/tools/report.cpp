#include "report.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qgd::cli {

std::string number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return ss.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::string Table::to_csv() const {
  std::ostringstream ss;
  for (std::size_t c = 0; c < columns.size(); ++c) ss << (c ? "," : "") << columns[c];
  ss << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) ss << (c ? "," : "") << row[c];
    ss << '\n';
  }
  return ss.str();
}

Json bound_entry(const std::string& name, double measured, double bound, const std::string& formula) {
  return Json{{"name", name}, {"measured", measured}, {"bound", bound}, {"formula", formula}, {"holds", measured <= bound}};
}

Json Report::to_json(const std::optional<std::string>& generated_at) const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["result"] = result;
  j["bounds"] = bounds;
  j["generated_at"] = generated_at ? Json(*generated_at) : Json(nullptr);
  return j;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const MatrixStats& s) {
  Json j;
  j["frobenius"] = s.frobenius;
  j["spectral"] = s.spectral;
  j["kappa"] = s.kappa ? Json(*s.kappa) : Json(nullptr);
  j["sparsity"] = s.sparsity;
  j["s1"] = s.s1;
  Json sp = Json::array();
  for (const auto& [p, v] : s.s_p) sp.push_back(Json{{"p", p}, {"s_p", v}});
  j["s_p"] = sp;
  return j;
}

Json to_json(const SveOutcome& o) {
  Json j;
  j["mode"] = to_string(o.mode);
  j["delta"] = o.delta;
  j["mu"] = o.mu;
  j["ancilla_bits"] = o.ancilla_bits;
  j["reps"] = o.reps;
  Json comps = Json::array();
  for (const auto& c : o.components) {
    comps.push_back(Json{{"beta", c.beta}, {"sigma", c.sigma}, {"estimate", c.estimate}, {"success", c.success}});
  }
  j["components"] = comps;
  j["all_success"] = o.all_success();
  if (o.mode == SveMode::exact_circuit) {
    j["subspace_weights"] = o.subspace_weights;
    j["restore_error"] = o.restore_error;
  }
  return j;
}

Json to_json(const SolveReport& r) {
  Json j;
  j["z"] = to_json(r.z);
  j["reference"] = to_json(r.reference);
  j["distance"] = r.distance;
  j["bound"] = r.bound;
  j["bound_formula"] = r.bound_formula;
  j["success_probability"] = r.success_probability;
  j["expected_repetitions"] = r.expected_repetitions;
  j["epsilon1"] = r.epsilon1;
  j["kappa"] = r.kappa;
  j["certified"] = r.certified;
  j["all_success"] = r.all_success;
  j["sve_failures"] = r.sve_failures;
  j["ancilla_bits"] = r.ancilla_bits;
  j["mu"] = r.mu;
  return j;
}

Json to_json(const SpectralNormResult& r) {
  Json j;
  j["estimate"] = r.estimate;
  j["eta"] = r.eta;
  j["error"] = std::abs(r.estimate - r.eta);
  j["epsilon"] = r.epsilon;
  j["delta_rel"] = r.delta_rel;
  j["sve_calls"] = r.sve_calls;
  j["all_success"] = r.all_success;
  Json trace = Json::array();
  for (const auto& t : r.trace) {
    trace.push_back(Json{{"l", t.l}, {"u", t.u}, {"tau", t.tau}, {"mass", t.mass}, {"estimate", t.estimate}});
  }
  j["trace"] = trace;
  return j;
}

Json to_json(const HistoryResult& h) {
  Json j;
  j["tau"] = h.tau;
  j["alpha"] = h.alpha;
  j["epsilon"] = h.epsilon;
  j["theta_tilde"] = to_json(h.theta_tilde);
  j["success_amplitude"] = h.success_amplitude;
  j["norm_estimate"] = h.norm_estimate;
  j["expected_repetitions"] = h.expected_repetitions;
  j["sve_calls_per_q"] = h.sve_calls_per_q;
  j["total_sve_calls"] = h.total_sve_calls;
  j["history_dim"] = h.history_dim;
  j["all_success"] = h.all_success;
  return j;
}

Json to_json(const AppReport& r) {
  Json j;
  j["z"] = to_json(r.z);
  j["reference"] = to_json(r.reference);
  j["distance"] = r.distance;
  j["bound"] = r.bound;
  j["bound_formula"] = r.bound_formula;
  j["kappa"] = r.kappa;
  j["scale"] = r.scale;
  j["mu"] = r.mu;
  j["batch_mu"] = r.batch_mu;
  j["theta"] = to_json(r.theta);
  j["classical_error"] = r.classical_error;
  j["classical_bound"] = r.classical_bound;
  j["ledger_error"] = r.ledger_error;
  j["ledger_bound"] = r.ledger_bound;
  j["state_error"] = r.state_error;
  j["state_bound"] = r.state_bound;
  j["optimum_distance"] = r.optimum_distance;
  j["normalized"] = r.normalized;
  j["all_success"] = r.all_success;
  j["history"] = to_json(r.history);
  return j;
}

Table vector_table(const Vector& z, const Vector& reference) {
  Table t{{"index", "z", "reference"}, {}};
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    t.rows.push_back({std::to_string(i + 1), number(z(i)), number(reference(i))});
  }
  return t;
}

}  // namespace qgd::cli
