#include "qgd/matvec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qgd {

namespace {

constexpr double kSvdCheckTolerance = 1e-10;

// |x|^p with the convention 0^p = 0 for every p (including p = 0).
double abs_pow(double x, double p) {
  if (x == 0.0) return 0.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return std::abs(x);
  return std::pow(std::abs(x), p);
}

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

void check_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("factorization exponent p must lie in [0, 1]");
}

void check_spectral(const Matrix& a, const SpectralData& s) {
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());
  const Matrix recon = s.left * s.singular_values.asDiagonal() * s.right.transpose();
  if (!((recon - a).norm() <= kSvdCheckTolerance * scale + 1e-300)) {
    throw NumericalError("svd: reconstruction check failed");
  }
  const auto k = s.singular_values.size();
  const Matrix id = Matrix::Identity(k, k);
  if ((s.left.transpose() * s.left - id).cwiseAbs().maxCoeff() > kSvdCheckTolerance ||
      (s.right.transpose() * s.right - id).cwiseAbs().maxCoeff() > kSvdCheckTolerance) {
    throw NumericalError("svd: singular vectors are not orthonormal");
  }
}

}  // namespace

void validate_matrix(const Matrix& a) {
  if (a.rows() < 1 || a.cols() < 1) throw InvalidArgument("matrix must have at least one row and column");
  if (!a.allFinite()) throw InvalidArgument("matrix has non-finite entries");
}

SpectralData svd(const Matrix& a) {
  validate_matrix(a);
  Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SpectralData out{solver.singularValues(), solver.matrixU(), solver.matrixV()};
  if (!out.singular_values.allFinite()) throw NumericalError("svd: decomposition did not converge");
  check_spectral(a, out);
  return out;
}

FullRightBasis svd_full_right(const Matrix& a) {
  validate_matrix(a);
  Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  if (!solver.singularValues().allFinite()) throw NumericalError("svd: decomposition did not converge");
  FullRightBasis out;
  out.right = solver.matrixV();
  out.left = solver.matrixU();
  out.singular_values = Vector::Zero(a.cols());
  out.singular_values.head(solver.singularValues().size()) = solver.singularValues();
  SpectralData thin{solver.singularValues(), out.left, out.right.leftCols(solver.singularValues().size())};
  check_spectral(a, thin);
  return out;
}

double row_power_sum(const Matrix& a, double p) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += abs_pow(a(i, j), p);
    best = std::max(best, s);
  }
  return best;
}

MatrixStats matrix_stats(const Matrix& a, std::span<const double> requested_p) {
  validate_matrix(a);
  MatrixStats st;
  st.frobenius = a.norm();
  const SpectralData sd = svd(a);
  st.spectral = sd.singular_values.size() > 0 ? sd.singular_values(0) : 0.0;
  if (st.spectral > 0.0) {
    double smallest = st.spectral;
    for (double s : sd.singular_values) {
      if (s > kRankTolerance * st.spectral) smallest = std::min(smallest, s);
    }
    st.kappa = st.spectral / smallest;
  }
  st.sparsity = static_cast<std::size_t>(row_power_sum(a, 0.0));
  st.s1 = row_power_sum(a, 1.0);
  for (double p : requested_p) st.s_p[p] = row_power_sum(a, p);
  return st;
}

std::vector<double> default_p_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(k / 10.0);
  return grid;
}

double mu_p(const Matrix& a, double p) {
  check_p(p);
  return std::sqrt(row_power_sum(a, 2.0 * p) * row_power_sum(a.transpose(), 2.0 * (1.0 - p)));
}

MuResult mu(const Matrix& a, std::span<const double> p_grid) {
  validate_matrix(a);
  if (p_grid.empty()) throw InvalidArgument("mu: p grid must be nonempty");
  MuResult best{a.norm(), std::nullopt};
  for (double p : p_grid) {
    const double v = mu_p(a, p);
    if (v < best.value) best = {v, p};
  }
  return best;
}

FactorPair build_factors(const Matrix& a, double p) {
  validate_matrix(a);
  check_p(p);
  const double row_scale = row_power_sum(a, 2.0 * p);
  const double col_scale = row_power_sum(a.transpose(), 2.0 * (1.0 - p));
  if (row_scale == 0.0 || col_scale == 0.0) throw InvalidArgument("build_factors: zero matrix has no factorization scale");
  const double rs = std::sqrt(row_scale);
  const double cs = std::sqrt(col_scale);
  FactorPair f{Matrix::Zero(a.rows(), a.cols()), Matrix::Zero(a.rows(), a.cols()), p, rs * cs};
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double x = a(i, j);
      if (x == 0.0) continue;
      f.P(i, j) = sign_of(x) * abs_pow(x, p) / rs;
      f.Q(i, j) = abs_pow(x, 1.0 - p) / cs;
    }
  }
  return f;
}

FactorPair build_factors_frobenius(const Matrix& a) {
  validate_matrix(a);
  const double fro = a.norm();
  if (fro == 0.0) throw InvalidArgument("build_factors: zero matrix has no factorization scale");
  FactorPair f{Matrix::Zero(a.rows(), a.cols()), Matrix::Zero(a.rows(), a.cols()),
               std::numeric_limits<double>::quiet_NaN(), fro};
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double rn = a.row(i).norm();
    if (rn == 0.0) continue;
    f.P.row(i) = a.row(i) / rn;
    f.Q.row(i).setConstant(rn / fro);
  }
  return f;
}

double factor_residual(const FactorPair& f, const Matrix& a) {
  return (f.mu * f.P.cwiseProduct(f.Q) - a).cwiseAbs().maxCoeff();
}

double abs_spectral_norm(const Matrix& a, int iters) {
  validate_matrix(a);
  if (iters < 1) throw InvalidArgument("abs_spectral_norm: iters must be >= 1");
  const Matrix abs_a = a.cwiseAbs();
  Vector x = Vector::Ones(a.cols());
  double ratio = 0.0;
  // For psd B = |A|^T |A|, ||B^k x|| / ||B^{k-1} x|| increases with k and is
  // bounded by lambda_max(B).
  for (int k = 0; k < iters; ++k) {
    const double xn = x.norm();
    if (xn == 0.0) return 0.0;
    x /= xn;
    Vector y = abs_a.transpose() * (abs_a * x);
    ratio = y.norm();
    x = std::move(y);
  }
  return std::sqrt(ratio);
}

double normalized_distance(const Vector& phi, const Vector& phi_tilde) {
  if (phi.size() != phi_tilde.size()) throw InvalidArgument("normalized_distance: size mismatch");
  const double n = phi.norm();
  if (n == 0.0) throw InvalidArgument("normalized_distance: phi must be nonzero");
  return std::sqrt(2.0) * (phi - phi_tilde).norm() / n;
}

double unit_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw InvalidArgument("unit_distance: size mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw InvalidArgument("unit_distance: zero vector");
  return (a / na - b / nb).norm();
}

Matrix symmetrize(const Matrix& a) {
  const auto m = a.rows();
  const auto n = a.cols();
  Matrix s = Matrix::Zero(m + n, m + n);
  s.topRightCorner(m, n) = a;
  s.bottomLeftCorner(n, m) = a.transpose();
  return s;
}

Matrix affine_block(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) throw InvalidArgument("affine_block: b must have one entry per row of A");
  Matrix out = Matrix::Zero(a.rows() + 1, a.cols() + 1);
  out.topLeftCorner(a.rows(), a.cols()) = -a;
  out.topRightCorner(a.rows(), 1) = b;
  return out;
}

Matrix append_row(const Matrix& a, const Vector& b) {
  if (a.cols() != b.size()) throw InvalidArgument("append_row: length mismatch");
  Matrix out(a.rows() + 1, a.cols());
  out.topRows(a.rows()) = a;
  out.row(a.rows()) = b.transpose();
  return out;
}

double asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace qgd
