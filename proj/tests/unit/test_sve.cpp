#include <doctest.h>

#include <cmath>

#include <Eigen/SVD>

#include "qgd/sve.hpp"

using namespace qgd;

namespace {

Matrix diag2(double a, double b) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

Matrix random_symmetric(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  return (a + a.transpose()) / 2;
}

WalkOperator walk_of(const Matrix& a, double p = 0.5) { return build_walk(StorePair::from_matrix(a, p)); }

}  // namespace

TEST_CASE("walk spectrum of diag(1, 1/2)") {
  const WalkOperator w = walk_of(diag2(1.0, 0.5));
  CHECK(w.mu() == doctest::Approx(1.0));
  CHECK(w.isometry_defect() <= 1e-12);
  const WalkSpectrumCheck c = check_walk_spectrum(w);
  CHECK(c.unitarity_defect <= 1e-12);
  CHECK(c.max_deviation <= 1e-8);
  CHECK(c.checked > 0);
  CHECK(walk_phase(1.0, 1.0) == doctest::Approx(0.0));
  CHECK(std::cos(walk_phase(0.5, 1.0) / 2) == doctest::Approx(0.5));
}

TEST_CASE("1x1 walk has the zero phase on Q~v") {
  Matrix a(1, 1);
  a << 1.0;
  const WalkOperator w = walk_of(a);
  const Matrix u = w.unitary();
  const Vector psi = w.q_isometry().col(0);
  CHECK((u * psi - psi).norm() <= 1e-12);
}

TEST_CASE("walk spectrum of random symmetric matrices for several p") {
  Rng rng(21);
  for (double p : {0.0, 0.25, 0.5, 1.0}) {
    const Matrix a = random_symmetric(4, rng);
    const WalkOperator w = walk_of(a, p);
    CHECK((w.matrix() - a).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(check_walk_spectrum(w).max_deviation <= 1e-8);
  }
}

TEST_CASE("analytic SVE on diag(1, 1/2)") {
  const WalkOperator w = walk_of(diag2(1.0, 0.5));
  Rng rng(0);
  int good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const SveOutcome o = sve(w, Vector::Unit(2, 1), {0.05, SveMode::analytic}, rng);
    for (const auto& c : o.components) {
      if (std::abs(c.beta) > 0.5 && std::abs(c.estimate - 0.5) <= 0.05) ++good;
    }
  }
  CHECK(good >= 90);
}

TEST_CASE("singular value on the estimation grid is exact") {
  // mu = 1 and sigma = 1 sit at phase 0, a grid point for every t.
  const WalkOperator w = walk_of(diag2(1.0, 0.5));
  Rng rng(1);
  const SveOutcome o = sve(w, Vector::Unit(2, 0), {0.05, SveMode::analytic}, rng);
  for (const auto& c : o.components) {
    if (std::abs(c.beta) > 0.5) CHECK(c.estimate == 1.0);
  }
}

TEST_CASE("oracle mode returns exact singular values") {
  Rng rng(2);
  const Matrix a = random_symmetric(5, rng);
  const SveOutcome o = sve(walk_of(a), Vector::Ones(5), {0.05, SveMode::oracle}, rng);
  const Eigen::JacobiSVD<Matrix> ref(a);
  for (const auto& c : o.components) {
    double nearest = 1e9;
    for (Eigen::Index i = 0; i < 5; ++i) nearest = std::min(nearest, std::abs(ref.singularValues()(i) - c.sigma));
    CHECK(nearest <= 1e-10);
    CHECK(c.estimate == c.sigma);
  }
}

TEST_CASE("exact circuit and analytic distributions agree on a 4x4 instance") {
  Rng rng(3);
  const Matrix a = random_symmetric(4, rng);
  const WalkOperator w = walk_of(a);
  Vector x = Vector::Ones(4);
  x.normalize();
  const auto an = analytic_outcome_distribution(w, x, 5);
  const auto ci = circuit_outcome_distribution(w, x, 5);
  CHECK(total_variation(an, ci) <= 0.05);

  const SveOutcome o = sve(w, x, {0.2, SveMode::exact_circuit}, rng);
  CHECK(o.restore_error <= 1e-8);
  double weight = 0.0;
  for (double s : o.subspace_weights) weight += s;
  CHECK(weight == doctest::Approx(1.0));
}

TEST_CASE("SVE meets its precision with probability at least 0.9") {
  Rng rng(4);
  const Matrix a = random_symmetric(6, rng);
  const WalkOperator w = walk_of(a);
  const Vector x = Vector::Ones(6).normalized();
  int ok = 0;
  for (int trial = 0; trial < 100; ++trial) ok += sve(w, x, {0.05, SveMode::analytic}, rng).all_success() ? 1 : 0;
  CHECK(ok >= 90);
}

TEST_CASE("sign estimation") {
  Rng rng(5);
  const Vector x = Vector::Ones(2).normalized();
  {
    const Matrix a = diag2(1.0, -0.5);
    const Matrix shifted = a + 0.5 * Matrix::Identity(2, 2);
    const SignedEstimate s = signed_eigen_estimate(walk_of(a), walk_of(shifted), 0.5, x, {0.05}, rng);
    for (const auto& c : s.components) CHECK(c.sign == (c.lambda > 0 ? 1 : -1));
  }
  {
    const Matrix a = diag2(0.8, 0.3);
    const SignedEstimate s = signed_eigen_estimate(walk_of(a), walk_of(a + 0.5 * Matrix::Identity(2, 2)), 0.5, x, {0.05}, rng);
    for (const auto& c : s.components) CHECK(c.sign == 1);
  }
  {
    const Matrix a = diag2(1.0, 0.0);
    const SignedEstimate s = signed_eigen_estimate(walk_of(a), walk_of(a + 0.5 * Matrix::Identity(2, 2)), 0.5, x, {0.05}, rng);
    for (const auto& c : s.components) {
      if (c.lambda == 0.0) CHECK(c.ambiguous);
    }
  }
  CHECK_THROWS_AS(signed_eigen_estimate(walk_of(diag2(1, 1)), walk_of(diag2(1.1, 1.1)), 0.1, x, {0.05}, rng),
                  InvalidArgument);
}
