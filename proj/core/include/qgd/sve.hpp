#pragma once

// Quantum-walk singular value estimation. The walk is stored through its two
// factor isometries: row i of `pbar` is the state p̄_i prepared from the row
// store, and row j of `qbar` is the state q̄^j prepared from the column store,
// each carrying one extra label for the norm slack. The extension rows
// p̄_{m+1} = e_{n+1} and q̄^{n+1} = e_{m+1} complete the isometries.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qgd/matvec.hpp"
#include "qgd/state.hpp"
#include "qgd/store.hpp"
#include "qgd/types.hpp"

namespace qgd {

enum class SveMode {
  analytic,       // exact outcome distribution per singular pair, sampled
  exact_circuit,  // explicit phase estimation on the walk unitary
  oracle,         // exact singular values, no estimation error
};

std::string to_string(SveMode mode);
SveMode parse_sve_mode(const std::string& text);

class WalkOperator {
 public:
  /// `pbar` is (m+1) x (n+1), `qbar` is (n+1) x (m+1), both with unit rows.
  WalkOperator(Matrix pbar, Matrix qbar, double mu);

  std::size_t m() const { return static_cast<std::size_t>(pbar_.rows()) - 1; }
  std::size_t n() const { return static_cast<std::size_t>(qbar_.rows()) - 1; }
  /// Dimension (m+1)(n+1) of the space the walk acts on.
  std::size_t dim() const { return (m() + 1) * (n() + 1); }
  double mu() const { return mu_; }
  const Matrix& pbar() const { return pbar_; }
  const Matrix& qbar() const { return qbar_; }

  /// mu * (P̃^T Q̃) restricted to the first m rows and n columns, i.e. A.
  const Matrix& matrix() const { return a_; }

  /// P̃|i> = |i>|p̄_i>, as a dim() x (m+1) matrix.
  Matrix p_isometry() const;
  /// Q̃|j> = |q̄^j>|j>, as a dim() x (n+1) matrix.
  Matrix q_isometry() const;
  /// max(||P̃^T P̃ - I||, ||Q̃^T Q̃ - I||), entrywise.
  double isometry_defect() const;

  /// W = (2 P̃P̃^T - I)(2 Q̃Q̃^T - I). Throws CapacityError when dim()^2
  /// exceeds `cap`.
  Matrix unitary(std::size_t cap = kSimulationCap) const;

 private:
  Matrix pbar_;
  Matrix qbar_;
  double mu_;
  Matrix a_;
};

/// Builds the walk from the two stores of a StorePair.
WalkOperator build_walk(const StorePair& stores);
/// Builds the walk from an explicit factorization, including the Frobenius
/// variant.
WalkOperator build_walk(const FactorPair& factors);

struct WalkSpectrumCheck {
  double unitarity_defect = 0.0;  // max |W^T W - I|
  double max_deviation = 0.0;     // max |mu cos(|theta|/2) - sigma| over overlapping eigenvectors
  std::size_t checked = 0;        // (component, eigenvector) pairs compared
};

/// Eigendecomposes W and, for each right singular vector v_i of A, compares
/// mu cos(|theta|/2) with sigma_i on every eigenvector that overlaps Q̃v̄_i.
WalkSpectrumCheck check_walk_spectrum(const WalkOperator& walk);

struct SveConfig {
  double delta = 0.05;  // precision on the singular value scale
  SveMode mode = SveMode::analytic;
  int reps = kDefaultReps;
  std::size_t cap = kSimulationCap;
};

/// Ancilla count for precision delta on a walk with normalization mu: the
/// walk phases are estimated to 2 delta / mu, which moves mu cos(theta/2) by
/// at most delta.
int sve_ancilla_bits(double delta, double mu);

/// theta in [0, pi] with cos(theta/2) = sigma / mu (sigma clamped to [0, mu]).
double walk_phase(double sigma, double mu);

struct SveComponent {
  double beta = 0.0;      // <v_i, x>
  double sigma = 0.0;     // true singular value
  double estimate = 0.0;  // sigma_bar
  bool success = false;   // |estimate - sigma| <= delta
};

struct SveOutcome {
  std::vector<SveComponent> components;
  Matrix left;   // columns u_i (zero columns where A has no left partner)
  Matrix right;  // columns v_i, a full basis of the input space
  SveMode mode = SveMode::analytic;
  double delta = 0.0;
  double mu = 0.0;
  int ancilla_bits = 0;
  int reps = 0;
  // Exact-circuit mode only: weight of the phase-estimated state on each
  // component's walk subspace, and the distance between the input state and
  // the state recovered by running phase estimation backwards.
  std::vector<double> subspace_weights;
  double restore_error = 0.0;

  bool all_success() const;
  std::size_t failures() const;
};

/// Singular value estimation of x in the right singular basis of the walk's
/// matrix. Components with equal singular values share one estimate, as they
/// share one phase-estimation outcome distribution.
SveOutcome sve(const WalkOperator& walk, const Vector& x, const SveConfig& cfg, Rng& rng);

/// Estimates for a given list of singular values of the walk's matrix, with
/// the matching right vectors (used only by the exact-circuit mode).
std::vector<double> estimate_singular_values(const WalkOperator& walk, const Matrix& right,
                                             std::span<const double> sigmas, const SveConfig& cfg, Rng& rng);

/// Single-shot distribution of the angle register when phase-estimating
/// Q̃x̄ with t bits, computed from the singular values.
std::vector<double> analytic_outcome_distribution(const WalkOperator& walk, const Vector& x, int t);
/// The same distribution from the explicit circuit.
std::vector<double> circuit_outcome_distribution(const WalkOperator& walk, const Vector& x, int t,
                                                 std::size_t cap = kSimulationCap);

double total_variation(std::span<const double> p, std::span<const double> q);

struct SignedComponent {
  double beta = 0.0;
  double lambda = 0.0;     // true eigenvalue
  double magnitude = 0.0;  // estimate of |lambda|
  double shifted = 0.0;    // estimate of |lambda + shift|
  int sign = 0;            // +1, -1, or 0 when ambiguous
  bool ambiguous = false;
  bool success = false;    // both estimates within delta
};

struct SignedEstimate {
  std::vector<SignedComponent> components;
  Matrix vectors;  // eigenvectors of A, as columns
  double shift = 0.0;
  double delta = 0.0;
};

/// Signed eigenvalue estimates for symmetric A from two walks: one over A and
/// one over A + shift I. Positive when the shifted estimate exceeds the
/// unshifted one by at least shift - 2 delta; ambiguous when the unshifted
/// estimate is at most 3 delta. Requires shift > 2 delta.
SignedEstimate signed_eigen_estimate(const WalkOperator& walk, const WalkOperator& shifted, double shift,
                                     const Vector& x, const SveConfig& cfg, Rng& rng);

}  // namespace qgd
