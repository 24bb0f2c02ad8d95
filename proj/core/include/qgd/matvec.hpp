#pragma once

// Dense linear algebra helpers, matrix statistics and the Hadamard
// factorizations A / mu = P o Q that parametrize the walk.

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "qgd/types.hpp"

namespace qgd {

/// Throws InvalidArgument unless `a` is non-empty with finite entries.
void validate_matrix(const Matrix& a);

/// Singular triples sorted by nonincreasing singular value. Thin: there are
/// min(rows, cols) triples; `left` is rows x k and `right` is cols x k.
struct SpectralData {
  Vector singular_values;
  Matrix left;
  Matrix right;
};

/// Classical decomposition oracle. Raises NumericalError if the result fails
/// its reconstruction or orthonormality self-check.
SpectralData svd(const Matrix& a);

/// Full right basis (cols x cols) with singular values padded by zeros, used
/// when every direction of the input space needs a singular value.
struct FullRightBasis {
  Vector singular_values;  // length cols
  Matrix left;             // rows x min(rows, cols)
  Matrix right;            // cols x cols
};
FullRightBasis svd_full_right(const Matrix& a);

/// Singular values below this fraction of sigma_max count as zero for kappa.
inline constexpr double kRankTolerance = 1e-12;

/// max_i ||a_i||_p^p over rows. For p == 0 this counts nonzero entries.
double row_power_sum(const Matrix& a, double p);

struct MatrixStats {
  double frobenius = 0.0;
  double spectral = 0.0;
  std::optional<double> kappa;  // empty for the all-zero matrix
  std::size_t sparsity = 0;     // max nonzeros in a row
  double s1 = 0.0;
  std::map<double, double> s_p;  // requested p -> s_p(A)
};

MatrixStats matrix_stats(const Matrix& a, std::span<const double> requested_p = {});

/// {0, 0.1, ..., 1.0}; 1/2 is already on the grid.
std::vector<double> default_p_grid();

/// sqrt(s_{2p}(A) s_{2(1-p)}(A^T)).
double mu_p(const Matrix& a, double p);

struct MuResult {
  double value = 0.0;
  std::optional<double> p;  // empty when the Frobenius norm wins
};

MuResult mu(const Matrix& a, std::span<const double> p_grid);
inline MuResult mu(const Matrix& a) {
  const auto grid = default_p_grid();
  return mu(a, grid);
}

/// A / mu = P o Q with ||p_i|| <= 1 for rows of P and ||q^j|| <= 1 for
/// columns of Q.
struct FactorPair {
  Matrix P;
  Matrix Q;
  double p = 0.5;  // NaN for the Frobenius-normalized variant
  double mu = 0.0;
};

/// p_ij = sgn(a_ij)|a_ij|^p / sqrt(s_{2p}(A)),
/// q_ij = |a_ij|^{1-p} / sqrt(s_{2(1-p)}(A^T)).
FactorPair build_factors(const Matrix& a, double p);

/// p_ij = a_ij / ||a_i||, q_ij = ||a_i|| / ||A||_F, so mu = ||A||_F.
FactorPair build_factors_frobenius(const Matrix& a);

/// Largest entrywise deviation of mu * (P o Q) from A.
double factor_residual(const FactorPair& f, const Matrix& a);

/// Power iteration on |A|^T |A| from the all-ones vector. The returned value is
/// nondecreasing in `iters` and never exceeds || |A| ||.
double abs_spectral_norm(const Matrix& a, int iters);

/// sqrt(2) ||phi - phi_tilde|| / ||phi||: bounds the distance between the
/// normalized vectors when the angle between them is below pi/2.
double normalized_distance(const Vector& phi, const Vector& phi_tilde);

/// || phi/||phi|| - phi_tilde/||phi_tilde|| ||.
double unit_distance(const Vector& a, const Vector& b);

/// [[0, A], [A^T, 0]].
Matrix symmetrize(const Matrix& a);

/// [[-A, b], [0, 0]], so that it maps (x, 1) to (b - Ax, 0).
Matrix affine_block(const Matrix& a, const Vector& b);

/// Vertical concatenation of A with the extra row b.
Matrix append_row(const Matrix& a, const Vector& b);

/// Largest |a_ij - a_ji|.
double asymmetry(const Matrix& a);

}  // namespace qgd
