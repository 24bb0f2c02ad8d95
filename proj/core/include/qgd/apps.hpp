#pragma once

// End-to-end solvers built on the history state: psd linear systems,
// weighted least squares with an optional ridge term, and cyclic
// mini-batch (stochastic) gradient descent over a row partition.

#include <optional>
#include <string>
#include <vector>

#include "qgd/descent.hpp"
#include "qgd/types.hpp"

namespace qgd {

struct AppConfig {
  double delta = 0.05;  // the output lands within 2 delta of the solution
  double alpha = 0.01;
  std::size_t tau = 0;          // 0 picks steps_for(kappa, delta, alpha)
  std::optional<double> kappa;  // eigenvalue bound for the normalized matrix
  double norm_epsilon = 0.05;   // precision of the spectral-norm estimate
  double p = 0.5;
  SveMode mode = SveMode::analytic;
  int reps = kDefaultReps;
  double norm_floor = 0.5;
  double norm_precision = 0.1;
  std::size_t cap = kSimulationCap;
};

/// Throws InvalidArgument on out-of-range fields.
void validate(const AppConfig& cfg);

/// ceil(kappa ln(kappa / delta) / alpha), at least 1.
std::size_t steps_for(double kappa, double delta, double alpha);

struct AppReport {
  Vector z;          // unit output state
  Vector reference;  // unit oracle solution
  double distance = 0.0;
  double bound = 0.0;
  std::string bound_formula;
  double kappa = 0.0;
  double scale = 1.0;  // the normalized matrix is scale * A
  double mu = 0.0;     // walk normalization of the linear step
  std::vector<double> batch_mu;
  HistoryResult history;
  Vector theta;                   // exact iterate theta_tau of the same recurrence
  double classical_error = 0.0;   // ||theta_tau - theta*||
  double classical_bound = 0.0;   // (1 - alpha/kappa)^tau ||theta* - r0||
  double ledger_error = 0.0;      // ||theta_tau - theta~_tau||
  double ledger_bound = 0.0;      // alpha tau^2 epsilon
  double state_error = 0.0;       // || |theta~_tau> - |theta_tau> ||
  double state_bound = 0.0;       // sqrt(2) alpha tau^2 epsilon / ||theta_tau||
  double optimum_distance = 0.0;  // || |z> - |theta*> ||, equal to distance unless batched
  bool normalized = true;         // the scaled matrix has spectral norm <= 1
  bool all_success = true;
};

/// |A^{-1} b> for psd A by gradient descent from r0 = b. A is rescaled first
/// so that its spectral norm is at most 1.
AppReport gd_linear_solve(const Matrix& a, const Vector& b, const AppConfig& cfg, Rng& rng);

struct WLSInstance {
  Matrix x;  // m x n
  Vector w;  // m positive weights
  Vector y;  // m outcomes
  double lambda = 0.0;

  std::size_t m() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t n() const { return static_cast<std::size_t>(x.cols()); }
  /// sqrt(W) X.
  Matrix weighted() const;
  /// X^T W y.
  Vector rhs() const;
  /// (X^T W X + lambda I)^{-1} X^T W y.
  Vector closed_form() const;
};

/// Throws InvalidArgument on size mismatches, nonpositive weights, a negative
/// lambda or a zero right-hand side.
void validate(const WLSInstance& inst);

struct PartitionPlan {
  std::vector<std::vector<std::size_t>> batches;  // 0-based row indices

  std::size_t k() const { return batches.size(); }
  /// Throws InvalidArgument unless the batches are nonempty, disjoint and
  /// cover 0..m-1.
  void validate(std::size_t m) const;
  /// k consecutive blocks whose sizes differ by at most one.
  static PartitionPlan contiguous(std::size_t m, std::size_t k);
  /// A seeded shuffle cut into k near-equal blocks.
  static PartitionPlan random(std::size_t m, std::size_t k, Rng& rng);
};

/// |(X^T W X + lambda I)^{-1} X^T W y> by gradient descent on the
/// normalized system c (X^T W X + lambda I) theta = X^T W y / ||X^T W y||.
AppReport wls_solve(const WLSInstance& inst, const AppConfig& cfg, Rng& rng);

/// Cyclic mini-batch descent: step s applies I - alpha A_j with
/// j = (s - 1) mod k and A_j = c (k B_j^T B_j + lambda I), B_j the batch rows
/// of sqrt(W) X. Steps run sequentially; the reference is the exact cyclic
/// recurrence and optimum_distance compares with the closed form. A single
/// batch takes the wls_solve path.
AppReport sgd_solve(const WLSInstance& inst, const PartitionPlan& plan, const AppConfig& cfg, Rng& rng);

}  // namespace qgd
