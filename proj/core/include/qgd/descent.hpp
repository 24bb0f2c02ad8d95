#pragma once

// Gradient descent with affine updates, run as a history state.
//
// The iterate after tau steps is theta_tau = r0 + alpha sum_{t=1..tau}
// S^{t-1} L(r0) with L(r0) = b - A r0 and S = I - alpha A. The history state
// puts block t (r0 for t = 0, alpha S^{t-1} L(r0) otherwise) on time label t
// with a flag qubit; a Hadamard transform on the time register and
// post-selection on time 0, flag 0 leaves theta_tau / (tau + 1).

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qgd/solvers.hpp"
#include "qgd/sve.hpp"
#include "qgd/types.hpp"

namespace qgd {

struct GDConfig {
  double alpha = 0.01;
  std::size_t tau = 1;   // padded up so that tau + 1 is a power of two
  double epsilon = 0.0;  // per-step error; 0 selects delta / (alpha tau^2)
  double delta = 0.05;   // target error behind the default epsilon
  SveMode mode = SveMode::analytic;
  int reps = kDefaultReps;
  double norm_floor = 0.5;       // smallest ||theta_tau|| worth amplifying
  double norm_precision = 0.1;   // relative error of the norm estimate
  std::size_t cap = kSimulationCap;
};

/// Smallest 2^l - 1 that is >= tau (and >= 1).
std::size_t padded_tau(std::size_t tau);

/// epsilon, or delta / (alpha tau^2) with tau already padded.
double resolved_epsilon(const GDConfig& cfg);

/// Throws InvalidArgument unless alpha lies in (0, 1] and the precisions are
/// positive.
void validate(const GDConfig& cfg);

struct ClassicalIterates {
  std::vector<Vector> theta;     // theta_0 = r0, ..., theta_tau
  std::vector<Vector> residual;  // b - A theta_t = S^t L(r0)
};

ClassicalIterates classical_iterates(const Matrix& a, const Vector& b, const Vector& r0, double alpha, std::size_t tau);

/// A psd problem together with the two walks the quantum steps use: one over
/// A for the linear part and one over [[-A, b], [0, 0]] for the affine part.
class GdProblem {
 public:
  GdProblem(Matrix a, Vector b, double p = 0.5);

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  std::size_t n() const { return static_cast<std::size_t>(b_.size()); }
  const WalkOperator& walk() const { return walk_; }
  const WalkOperator& affine() const { return affine_; }
  /// Eigenvectors (columns) and eigenvalues of A.
  const Matrix& eigenvectors() const { return vectors_; }
  const Vector& eigenvalues() const { return values_; }

 private:
  Matrix a_;
  Vector b_;
  WalkOperator walk_;
  WalkOperator affine_;
  Matrix vectors_;
  Vector values_;
};

struct SveCounter {
  std::size_t sve_calls = 0;     // linear-part estimations
  std::size_t affine_calls = 0;  // affine-part estimations
  std::size_t total() const { return sve_calls + affine_calls; }
};

struct StepResult {
  Vector good;               // flag-0 branch (unnormalized)
  double garbage_norm = 0.0; // norm carried by the flag-1 branch
  bool success = true;
};

/// One approximate step V. For t = 0 the flag-0 branch is alpha L~(r) with the
/// affine map at precision epsilon / sqrt(2); for t >= 1 it is S~ r with S~
/// built from SVE of A at precision epsilon, lambda_bar_S = 1 - alpha
/// lambda_bar. Throws if alpha ||L~(r)|| > 1.
StepResult step_v(std::size_t t, const Vector& r, const GdProblem& problem, const GDConfig& cfg, Rng& rng,
                  SveCounter& counter);

struct IterateResult {
  Vector block;  // alpha S~^{t-1} L~(r0), or r0 for t = 0
  double garbage_norm = 0.0;
  bool success = true;
  std::size_t sve_calls = 0;
};

/// The conditional iterate U on time label t, computed on the fast path: one
/// affine estimation and one SVE of A, with the rotation raised to the power
/// t - 1. The identity for t = 0.
IterateResult iterate_u(std::size_t t, const Vector& r0, const GdProblem& problem, const GDConfig& cfg, Rng& rng);

/// Estimated affine part L~(r0) (unnormalized) and whether every SVE
/// component met its precision.
struct AffineStep {
  Vector value;
  bool success = true;
};
using AffineFn = std::function<AffineStep(Rng&)>;

/// Estimated linear operator S~_s for step s >= 1 (a dense n x n matrix).
struct LinearStep {
  Matrix op;
  bool success = true;
};
using StepFn = std::function<LinearStep(std::size_t step, Rng&)>;

enum class Schedule {
  fast,        // one S~ shared by every step, applied as powers
  sequential,  // a fresh S~_s per step, applied in order
};

struct HistoryResult {
  std::size_t tau = 0;
  double alpha = 0.0;
  double epsilon = 0.0;
  std::vector<Vector> blocks;  // flag-0 vector of each time label
  Vector theta_tilde;          // sum of the blocks
  Vector extracted;            // (tau+1) x flag-0, time-0 amplitudes after the Hadamard
  Vector output;               // amplified unit state
  double success_amplitude = 0.0;  // ||theta_tilde|| / (tau + 1)
  double norm_estimate = 0.0;      // (tau + 1) sqrt(amplitude estimate)
  double expected_repetitions = 0.0;
  std::size_t sve_calls_per_q = 0;
  std::size_t total_sve_calls = 0;
  std::size_t history_dim = 0;
  bool all_success = true;
};

/// Builds the history state for an n-dimensional problem from the affine and
/// linear step estimators, erases the time register and amplifies.
HistoryResult run_history(std::size_t n, const Vector& r0, const AffineFn& affine, const StepFn& step, Schedule schedule,
                          const GDConfig& cfg, Rng& rng);

/// run_history on the fast path for a GdProblem.
HistoryResult build_history(const GdProblem& problem, const Vector& r0, const GDConfig& cfg, Rng& rng);

/// S~ = V diag(1 - alpha clamp(lambda_bar, 0, 1)) V^T.
Matrix step_operator(const Matrix& vectors, std::span<const double> lambda_bar, double alpha);

}  // namespace qgd
