#include "qgd/sve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace qgd {

namespace {

constexpr double kRowTolerance = 1e-10;
constexpr double kOverlapTolerance = 1e-6;

// Indices grouped by equal singular value, so that degenerate components
// share a single estimate.
std::vector<std::vector<std::size_t>> group_equal(std::span<const double> sigmas, double scale) {
  std::vector<std::size_t> order(sigmas.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sigmas[a] > sigmas[b]; });
  std::vector<std::vector<std::size_t>> groups;
  const double tol = 1e-10 * std::max(1.0, scale);
  for (std::size_t k : order) {
    if (!groups.empty() && std::abs(sigmas[groups.back().front()] - sigmas[k]) <= tol) {
      groups.back().push_back(k);
    } else {
      groups.push_back({k});
    }
  }
  return groups;
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

Vector extend(const Vector& x) {
  Vector out = Vector::Zero(x.size() + 1);
  out.head(x.size()) = x;
  return out;
}

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("SVE precision delta must be positive");
}

// Phase estimation on the walk applied to a single register holding `psi`.
PureState walk_phase_estimation(const CMatrix& w, const Vector& psi, int t, std::size_t cap) {
  const std::vector<Register> layout{{"walk", static_cast<std::size_t>(psi.size())}};
  return phase_estimation(w, PureState::normalized(layout, psi.cast<Complex>()), "walk", t, "angle", cap);
}

double exact_component_estimate(const WalkOperator& walk, const CMatrix& w, const Vector& v, int t, int reps,
                                std::size_t cap, Rng& rng) {
  CVector psi = (walk.q_isometry() * extend(v)).cast<Complex>();
  const std::size_t n = std::size_t{1} << t;
  std::vector<double> draws;
  // Repeated registers on the collapsed state give the same statistics as
  // independent registers, without holding all of them at once.
  for (int r = 0; r < reps; ++r) {
    const std::vector<Register> layout{{"walk", static_cast<std::size_t>(psi.size())}};
    const PureState pe = phase_estimation(w, PureState::normalized(layout, psi), "walk", t, "angle", cap);
    const Measurement meas = measure(pe, "angle", rng);
    draws.push_back(std::abs(outcome_angle(meas.outcome, t)));
    for (Eigen::Index f = 0; f < psi.size(); ++f) psi(f) = meas.state.amplitudes()(f * static_cast<Eigen::Index>(n) + static_cast<Eigen::Index>(meas.outcome));
    psi.normalize();
  }
  return walk.mu() * std::cos(median(std::move(draws)) / 2.0);
}

}  // namespace

std::string to_string(SveMode mode) {
  switch (mode) {
    case SveMode::analytic:
      return "analytic";
    case SveMode::exact_circuit:
      return "exact_circuit";
    case SveMode::oracle:
      return "oracle";
  }
  return "analytic";
}

SveMode parse_sve_mode(const std::string& text) {
  if (text == "analytic") return SveMode::analytic;
  if (text == "exact_circuit" || text == "exact-circuit" || text == "exact") return SveMode::exact_circuit;
  if (text == "oracle") return SveMode::oracle;
  throw InvalidArgument("unknown SVE mode '" + text + "' (expected analytic, exact_circuit or oracle)");
}

WalkOperator::WalkOperator(Matrix pbar, Matrix qbar, double mu) : pbar_(std::move(pbar)), qbar_(std::move(qbar)), mu_(mu) {
  if (!(mu_ > 0.0) || !std::isfinite(mu_)) throw InvalidArgument("walk: mu must be positive");
  if (pbar_.rows() < 2 || qbar_.rows() < 2 || pbar_.cols() != qbar_.rows() || qbar_.cols() != pbar_.rows()) {
    throw InvalidArgument("walk: factor shapes must be (m+1)x(n+1) and (n+1)x(m+1)");
  }
  if (!pbar_.allFinite() || !qbar_.allFinite()) throw InvalidArgument("walk: non-finite factor entries");
  for (Eigen::Index i = 0; i < pbar_.rows(); ++i) {
    if (std::abs(pbar_.row(i).norm() - 1.0) > kRowTolerance) throw InvalidArgument("walk: rows of pbar must be unit vectors");
  }
  for (Eigen::Index j = 0; j < qbar_.rows(); ++j) {
    if (std::abs(qbar_.row(j).norm() - 1.0) > kRowTolerance) throw InvalidArgument("walk: rows of qbar must be unit vectors");
  }
  const auto m = static_cast<Eigen::Index>(this->m());
  const auto n = static_cast<Eigen::Index>(this->n());
  if (pbar_.row(m) != Vector::Unit(n + 1, n).transpose() || qbar_.row(n) != Vector::Unit(m + 1, m).transpose()) {
    throw InvalidArgument("walk: extension rows must be the last basis vectors");
  }
  a_ = mu_ * pbar_.topLeftCorner(m, n).cwiseProduct(qbar_.topLeftCorner(n, m).transpose());
}

Matrix WalkOperator::p_isometry() const {
  const std::size_t m1 = m() + 1, n1 = n() + 1;
  Matrix p = Matrix::Zero(dim(), m1);
  for (std::size_t i = 0; i < m1; ++i) {
    for (std::size_t j = 0; j < n1; ++j) p(i * n1 + j, i) = pbar_(i, j);
  }
  return p;
}

Matrix WalkOperator::q_isometry() const {
  const std::size_t m1 = m() + 1, n1 = n() + 1;
  Matrix q = Matrix::Zero(dim(), n1);
  for (std::size_t i = 0; i < m1; ++i) {
    for (std::size_t j = 0; j < n1; ++j) q(i * n1 + j, j) = qbar_(j, i);
  }
  return q;
}

double WalkOperator::isometry_defect() const {
  const Matrix p = p_isometry();
  const Matrix q = q_isometry();
  const double dp = (p.transpose() * p - Matrix::Identity(p.cols(), p.cols())).cwiseAbs().maxCoeff();
  const double dq = (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
  return std::max(dp, dq);
}

Matrix WalkOperator::unitary(std::size_t cap) const {
  if (dim() > cap / dim()) throw CapacityError("walk unitary of dimension " + std::to_string(dim()) + " exceeds the simulation cap");
  const Matrix p = p_isometry();
  const Matrix q = q_isometry();
  const Matrix id = Matrix::Identity(dim(), dim());
  return (2.0 * p * p.transpose() - id) * (2.0 * q * q.transpose() - id);
}

WalkOperator build_walk(const StorePair& stores) {
  const std::size_t m = stores.m(), n = stores.n();
  if (stores.cols.rows() != n || stores.cols.cols() != m) throw InvalidArgument("walk: row and column stores disagree on dimensions");
  Matrix pbar = Matrix::Zero(m + 1, n + 1);
  Matrix qbar = Matrix::Zero(n + 1, m + 1);
  for (std::size_t i = 0; i < m; ++i) pbar.row(i) = stores.rows.prepare_row_state(i).transpose();
  for (std::size_t j = 0; j < n; ++j) qbar.row(j) = stores.cols.prepare_row_state(j).transpose();
  pbar(m, n) = 1.0;
  qbar(n, m) = 1.0;
  return WalkOperator(std::move(pbar), std::move(qbar), stores.mu());
}

WalkOperator build_walk(const FactorPair& f) {
  const auto m = f.P.rows(), n = f.P.cols();
  if (f.Q.rows() != m || f.Q.cols() != n) throw InvalidArgument("walk: P and Q must have the same shape");
  Matrix pbar = Matrix::Zero(m + 1, n + 1);
  Matrix qbar = Matrix::Zero(n + 1, m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    pbar.row(i).head(n) = f.P.row(i);
    pbar(i, n) = std::sqrt(std::max(0.0, 1.0 - f.P.row(i).squaredNorm()));
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    qbar.row(j).head(m) = f.Q.col(j).transpose();
    qbar(j, m) = std::sqrt(std::max(0.0, 1.0 - f.Q.col(j).squaredNorm()));
  }
  pbar(m, n) = 1.0;
  qbar(n, m) = 1.0;
  return WalkOperator(std::move(pbar), std::move(qbar), f.mu);
}

WalkSpectrumCheck check_walk_spectrum(const WalkOperator& walk) {
  const Matrix w = walk.unitary();
  WalkSpectrumCheck out;
  out.unitarity_defect = (w.transpose() * w - Matrix::Identity(w.rows(), w.cols())).cwiseAbs().maxCoeff();
  // W is normal, so its complex Schur form is diagonal and the Schur vectors
  // are an orthonormal eigenbasis.
  Eigen::ComplexSchur<CMatrix> schur(w.cast<Complex>());
  const CMatrix& u = schur.matrixU();
  const CMatrix& t = schur.matrixT();
  const FullRightBasis basis = svd_full_right(walk.matrix());
  const Matrix q = walk.q_isometry();
  for (Eigen::Index i = 0; i < basis.right.cols(); ++i) {
    const CVector overlap = u.adjoint() * (q * extend(basis.right.col(i))).cast<Complex>();
    for (Eigen::Index k = 0; k < overlap.size(); ++k) {
      if (std::abs(overlap(k)) <= kOverlapTolerance) continue;
      const double theta = std::abs(std::arg(t(k, k)));
      out.max_deviation = std::max(out.max_deviation, std::abs(walk.mu() * std::cos(theta / 2.0) - basis.singular_values(i)));
      ++out.checked;
    }
  }
  return out;
}

int sve_ancilla_bits(double delta, double mu) {
  check_delta(delta);
  const double eps = std::min(2.0 * delta / mu, 3.0);
  return ancilla_bits(eps);
}

double walk_phase(double sigma, double mu) {
  const double c = std::clamp(sigma / mu, 0.0, 1.0);
  return 2.0 * std::acos(c);
}

bool SveOutcome::all_success() const { return failures() == 0; }

std::size_t SveOutcome::failures() const {
  return static_cast<std::size_t>(std::count_if(components.begin(), components.end(), [](const SveComponent& c) { return !c.success; }));
}

std::vector<double> estimate_singular_values(const WalkOperator& walk, const Matrix& right, std::span<const double> sigmas,
                                             const SveConfig& cfg, Rng& rng) {
  check_delta(cfg.delta);
  if (cfg.reps < 1) throw InvalidArgument("SVE reps must be >= 1");
  std::vector<double> est(sigmas.begin(), sigmas.end());
  if (cfg.mode == SveMode::oracle) return est;
  const int t = sve_ancilla_bits(cfg.delta, walk.mu());
  CMatrix w;
  if (cfg.mode == SveMode::exact_circuit) {
    if (walk.dim() > cfg.cap >> t) {
      throw CapacityError("exact-circuit SVE needs " + std::to_string(walk.dim()) + " x 2^" + std::to_string(t) +
                          " amplitudes, above the cap; use the analytic mode");
    }
    if (static_cast<std::size_t>(right.cols()) != sigmas.size() || static_cast<std::size_t>(right.rows()) != walk.n()) {
      throw InvalidArgument("estimate_singular_values: right vectors do not match the singular values");
    }
    w = walk.unitary(cfg.cap).cast<Complex>();
  }
  for (const auto& g : group_equal(sigmas, walk.mu())) {
    double e = 0.0;
    if (cfg.mode == SveMode::analytic) {
      const double folded = estimate_folded_phase(walk_phase(sigmas[g.front()], walk.mu()), t, cfg.reps, rng);
      e = walk.mu() * std::cos(folded / 2.0);
    } else {
      e = exact_component_estimate(walk, w, right.col(static_cast<Eigen::Index>(g.front())), t, cfg.reps, cfg.cap, rng);
    }
    for (std::size_t k : g) est[k] = e;
  }
  return est;
}

SveOutcome sve(const WalkOperator& walk, const Vector& x, const SveConfig& cfg, Rng& rng) {
  check_delta(cfg.delta);
  if (static_cast<std::size_t>(x.size()) != walk.n()) throw InvalidArgument("sve: x has the wrong dimension");
  if (!x.allFinite() || !(x.norm() > 0.0)) throw InvalidArgument("sve: x must be a nonzero finite vector");
  const FullRightBasis basis = svd_full_right(walk.matrix());
  const auto n = static_cast<Eigen::Index>(walk.n());
  const auto m = static_cast<Eigen::Index>(walk.m());
  const auto k = std::min(m, n);

  SveOutcome out;
  out.mode = cfg.mode;
  out.delta = cfg.delta;
  out.mu = walk.mu();
  out.reps = cfg.reps;
  out.right = basis.right;
  out.left = Matrix::Zero(m, n);
  out.left.leftCols(k) = basis.left.leftCols(k);
  if (cfg.mode != SveMode::oracle) out.ancilla_bits = sve_ancilla_bits(cfg.delta, walk.mu());

  std::vector<double> sigmas(basis.singular_values.data(), basis.singular_values.data() + n);
  const auto est = estimate_singular_values(walk, basis.right, sigmas, cfg, rng);
  const Vector beta = basis.right.transpose() * x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    out.components.push_back({beta(i), sigmas[s], est[s], std::abs(est[s] - sigmas[s]) <= cfg.delta});
  }

  if (cfg.mode == SveMode::exact_circuit) {
    const int t = out.ancilla_bits;
    const std::size_t big_n = std::size_t{1} << t;
    const CMatrix w = walk.unitary(cfg.cap).cast<Complex>();
    const Matrix q = walk.q_isometry();
    const Matrix p = walk.p_isometry();
    const Vector psi = q * extend(x / x.norm());
    const PureState pe = walk_phase_estimation(w, psi, t, cfg.cap);
    const auto dim = static_cast<Eigen::Index>(walk.dim());
    const auto cols = static_cast<Eigen::Index>(big_n);
    // Amplitudes as (walk index) x (angle outcome).
    const CMatrix amp = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        pe.amplitudes().data(), dim, cols);
    for (const auto& g : group_equal(sigmas, walk.mu())) {
      Matrix span(dim, 0);
      auto push = [&](const Vector& v) {
        span.conservativeResize(Eigen::NoChange, span.cols() + 1);
        span.col(span.cols() - 1) = v;
      };
      for (std::size_t idx : g) {
        const auto i = static_cast<Eigen::Index>(idx);
        push(q * extend(basis.right.col(i)));
        if (i < k && sigmas[idx] > 0.0) push(p * extend(basis.left.col(i)));
      }
      Eigen::ColPivHouseholderQR<Matrix> qr(span);
      qr.setThreshold(1e-10);
      const Matrix ortho = Matrix(qr.householderQ()).leftCols(qr.rank());
      const double weight = (ortho.transpose().cast<Complex>() * amp).squaredNorm();
      for (std::size_t idx : g) {
        out.subspace_weights.resize(sigmas.size());
        out.subspace_weights[idx] = g.front() == idx ? weight : 0.0;
      }
    }
    const PureState back = inverse_phase_estimation(w, pe, "walk");
    out.restore_error = (back.amplitudes() - psi.cast<Complex>()).norm();
  }
  return out;
}

std::vector<double> analytic_outcome_distribution(const WalkOperator& walk, const Vector& x, int t) {
  if (static_cast<std::size_t>(x.size()) != walk.n() || !(x.norm() > 0.0)) throw InvalidArgument("distribution: bad x");
  const FullRightBasis basis = svd_full_right(walk.matrix());
  const Vector beta = basis.right.transpose() * (x / x.norm());
  std::vector<double> p(std::size_t{1} << t, 0.0);
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double w = beta(i) * beta(i);
    if (w == 0.0) continue;
    const double theta = walk_phase(basis.singular_values(i), walk.mu());
    const auto plus = phase_distribution(theta, t);
    const auto minus = phase_distribution(-theta, t);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += w * 0.5 * (plus[k] + minus[k]);
  }
  return p;
}

std::vector<double> circuit_outcome_distribution(const WalkOperator& walk, const Vector& x, int t, std::size_t cap) {
  if (static_cast<std::size_t>(x.size()) != walk.n() || !(x.norm() > 0.0)) throw InvalidArgument("distribution: bad x");
  const CMatrix w = walk.unitary(cap).cast<Complex>();
  const Vector psi = walk.q_isometry() * extend(x / x.norm());
  return walk_phase_estimation(w, psi, t, cap).marginal("angle");
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidArgument("total_variation: length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

SignedEstimate signed_eigen_estimate(const WalkOperator& walk, const WalkOperator& shifted, double shift,
                                     const Vector& x, const SveConfig& cfg, Rng& rng) {
  check_delta(cfg.delta);
  const Matrix& a = walk.matrix();
  if (a.rows() != a.cols()) throw InvalidArgument("signed_eigen_estimate: matrix must be square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (asymmetry(a) > 1e-10 * scale) throw InvalidArgument("signed_eigen_estimate: matrix must be symmetric");
  const Matrix expected = a + shift * Matrix::Identity(a.rows(), a.cols());
  if (shifted.matrix().rows() != a.rows() || (shifted.matrix() - expected).cwiseAbs().maxCoeff() > 1e-10 * (scale + shift)) {
    throw InvalidArgument("signed_eigen_estimate: second walk must hold A + shift I");
  }
  if (!(shift > 2.0 * cfg.delta)) throw InvalidArgument("signed_eigen_estimate: shift must exceed 2 delta");
  if (x.size() != a.cols()) throw InvalidArgument("signed_eigen_estimate: x has the wrong dimension");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  if (eig.info() != Eigen::Success) throw NumericalError("signed_eigen_estimate: eigendecomposition failed");
  const Vector lambda = eig.eigenvalues();
  const Matrix& v = eig.eigenvectors();
  std::vector<double> mags(static_cast<std::size_t>(lambda.size()));
  std::vector<double> shifted_mags(mags.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    mags[static_cast<std::size_t>(i)] = std::abs(lambda(i));
    shifted_mags[static_cast<std::size_t>(i)] = std::abs(lambda(i) + shift);
  }
  const auto est = estimate_singular_values(walk, v, mags, cfg, rng);
  const auto est_shift = estimate_singular_values(shifted, v, shifted_mags, cfg, rng);
  const Vector beta = v.transpose() * x;

  SignedEstimate out;
  out.vectors = v;
  out.shift = shift;
  out.delta = cfg.delta;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    SignedComponent c;
    c.beta = beta(i);
    c.lambda = lambda(i);
    c.magnitude = est[s];
    c.shifted = est_shift[s];
    c.success = std::abs(est[s] - mags[s]) <= cfg.delta && std::abs(est_shift[s] - shifted_mags[s]) <= cfg.delta;
    if (c.magnitude <= 3.0 * cfg.delta) {
      c.ambiguous = true;
    } else {
      c.sign = (c.shifted - c.magnitude >= shift - 2.0 * cfg.delta) ? 1 : -1;
    }
    out.components.push_back(c);
  }
  return out;
}

}  // namespace qgd
