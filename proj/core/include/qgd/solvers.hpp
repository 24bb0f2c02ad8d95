#pragma once

// Matrix multiplication and inversion through SVE plus a conditional
// rotation, the affine map b - Ax, and spectral-norm estimation.

#include <string>
#include <vector>

#include "qgd/sve.hpp"
#include "qgd/types.hpp"

namespace qgd {

struct SolveReport {
  Vector z;          // unit output state
  Vector reference;  // unit oracle state
  double distance = 0.0;
  double bound = 0.0;
  std::string bound_formula;
  double success_probability = 0.0;  // post-selection probability
  double expected_repetitions = 0.0;
  double epsilon1 = 0.0;
  double kappa = 0.0;
  bool certified = true;   // kappa * epsilon1 <= 1/2
  bool all_success = true; // every SVE component within epsilon1
  std::size_t sve_failures = 0;
  int ancilla_bits = 0;
  double mu = 0.0;
};

/// |Ax> for psd A with eigenvalues in [1/kappa, 1]: SVE at precision
/// epsilon1, rotation by the clamped estimates, post-selection. Distance
/// bound sqrt(2) epsilon1 kappa.
SolveReport multiply(const WalkOperator& walk, const Vector& x, double epsilon1, double kappa, const SveConfig& base,
                     Rng& rng);

/// |A^{-1}b> under the same assumptions, rotating by (1/kappa) / lambda_bar.
/// Distance bound 2 sqrt(2) kappa epsilon1. Throws if kappa epsilon1 > 1/2.
SolveReport solve(const WalkOperator& walk, const Vector& b, double epsilon1, double kappa, const SveConfig& base,
                  Rng& rng);

struct ApplyResult {
  Vector value;  // unnormalized estimate of A x
  SveOutcome outcome;
};

/// sum_i beta_i sigma_bar_i u_i for any (possibly rectangular) A, with SVE at
/// the given precision, so the error is at most ||x|| * precision.
ApplyResult apply_via_sve(const WalkOperator& walk, const Vector& x, double precision, const SveConfig& base, Rng& rng);

/// Walk over [[-A, b], [0, 0]], the matrix sending (x, 1) to (b - Ax, 0).
WalkOperator affine_walk(const Matrix& a, const Vector& b, double p = 0.5);

struct AffineResult {
  Vector value;      // unnormalized estimate of b - alpha A x
  Vector reference;  // exact b - alpha A x
  double norm = 0.0;
  double error = 0.0;      // ||value - reference||
  double precision = 0.0;  // SVE precision used: epsilon / ||(alpha x, 1)||
  bool zero_norm = false;
  bool all_success = true;
};

/// b - alpha A x to within epsilon, from a walk built by affine_walk.
AffineResult affine_apply(const WalkOperator& affine, const Vector& x, double alpha, double epsilon,
                          const SveConfig& base, Rng& rng);

struct SpectralNormRound {
  double l = 0.0;
  double u = 0.0;
  double tau = 0.0;
  double mass = 0.0;      // exact flagged mass
  double estimate = 0.0;  // its amplitude estimate
};

struct SpectralNormResult {
  double estimate = 0.0;  // of eta = sigma_max / ||A||_F
  double eta = 0.0;       // oracle value, for reporting
  double epsilon = 0.0;
  double delta_rel = 0.0;
  std::vector<SpectralNormRound> trace;
  std::size_t sve_calls = 0;
  bool all_success = true;
};

/// Binary search on tau over ceil(log2(1/epsilon)) rounds: each round runs
/// SVE at precision epsilon/2 (in units of ||A||_F) on the Frobenius-walk
/// state of A, flags components with estimate >= tau, and amplitude-estimates
/// the flagged mass to relative error delta_rel.
SpectralNormResult spectral_norm_estimate(const Matrix& a, double epsilon, double delta_rel, const SveConfig& base,
                                          Rng& rng);

struct NormalizedMatrix {
  Matrix scaled;
  double scale = 1.0;        // scaled = scale * A
  double eta_estimate = 0.0;
  double spectral_norm = 0.0;  // oracle norm of the scaled matrix
  bool certified = false;      // spectral_norm <= 1
};

/// Scales A by 1 / ((eta_bar + epsilon) ||A||_F). Throws on a zero matrix.
NormalizedMatrix normalize_matrix(const Matrix& a, double epsilon, const SveConfig& base, Rng& rng);

}  // namespace qgd
