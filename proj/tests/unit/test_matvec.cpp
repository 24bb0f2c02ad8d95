#include <doctest.h>

#include <cmath>

#include <Eigen/SVD>

#include "qgd/generate.hpp"
#include "qgd/matvec.hpp"

using namespace qgd;

TEST_CASE("svd of identity and diagonal") {
  const SpectralData id = svd(Matrix::Identity(2, 2));
  CHECK(id.singular_values(0) == doctest::Approx(1.0));
  CHECK(id.singular_values(1) == doctest::Approx(1.0));
  Matrix d(2, 2);
  d << 1, 0, 0, 0.5;
  const SpectralData s = svd(d);
  CHECK(s.singular_values(0) == doctest::Approx(1.0));
  CHECK(s.singular_values(1) == doctest::Approx(0.5));
  CHECK(std::abs(s.right(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(s.right(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("svd reconstructs a random 8x8 matrix") {
  Rng rng(3);
  std::normal_distribution<double> g;
  Matrix a(8, 8);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  const SpectralData s = svd(a);
  const Matrix back = s.left * s.singular_values.asDiagonal() * s.right.transpose();
  CHECK((back - a).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("matrix statistics") {
  const MatrixStats id = matrix_stats(Matrix::Identity(2, 2));
  CHECK(id.frobenius == doctest::Approx(std::sqrt(2.0)));
  CHECK(id.sparsity == 1);
  CHECK(id.s1 == doctest::Approx(1.0));

  const MatrixStats ones = matrix_stats(Matrix::Ones(2, 2));
  CHECK(ones.frobenius == doctest::Approx(2.0));
  CHECK(ones.s1 == doctest::Approx(2.0));
  CHECK(ones.spectral == doctest::Approx(2.0));

  CHECK_FALSE(matrix_stats(Matrix::Zero(3, 3)).kappa.has_value());
}

TEST_CASE("perturbed permutation is dense with small row l1 norm") {
  Rng rng(0);
  GenParams gp;
  gp.n = 16;
  gp.perturbation = 0.01;
  const Matrix a = generate(Family::perturbed_permutation, gp, rng);
  const MatrixStats s = matrix_stats(a);
  CHECK(s.sparsity == 16);
  CHECK(s.s1 <= 1.15);
}

TEST_CASE("mu of the identity beats the Frobenius norm") {
  const std::vector<double> grid{0.5};
  const MuResult r = mu(Matrix::Identity(5, 5), grid);
  CHECK(r.value == doctest::Approx(1.0));
  REQUIRE(r.p.has_value());
  CHECK(*r.p == doctest::Approx(0.5));
}

TEST_CASE("mu of a symmetric matrix is at most s1") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a(6, 6);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
    a = (a + a.transpose()).eval();
    CHECK(mu_p(a, 0.5) <= row_power_sum(a, 1.0) + 1e-12);
  }
}

TEST_CASE("sign matrices have mu of order sqrt(n)") {
  Rng rng(1);
  GenParams gp;
  gp.n = 16;
  const Matrix a = generate(Family::sign, gp, rng);
  CHECK(mu(a).value >= 0.9 * std::sqrt(16.0));
}

TEST_CASE("factors of diag(1, 1/2)") {
  Matrix d(2, 2);
  d << 1, 0, 0, 0.5;
  const FactorPair f = build_factors(d, 0.5);
  CHECK(f.mu == doctest::Approx(1.0));
  Matrix expect(2, 2);
  expect << 1, 0, 0, 1.0 / std::sqrt(2.0);
  CHECK((f.P - expect).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((f.Q - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("factorizations reconstruct A") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(5, 5);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  a = (a + a.transpose()).eval();
  CHECK(factor_residual(build_factors(a, 0.5), a) <= 1e-12);
  const FactorPair fro = build_factors_frobenius(a);
  CHECK(fro.mu == doctest::Approx(a.norm()));
  CHECK(factor_residual(fro, a) <= 1e-12);
  CHECK_THROWS_AS(build_factors(Matrix::Zero(2, 2), 0.5), InvalidArgument);
}

TEST_CASE("spectral norm of |A|") {
  CHECK(abs_spectral_norm(Matrix::Ones(6, 6), 50) == doctest::Approx(6.0));
  Matrix d(2, 2);
  d << 1, 0, 0, 0.5;
  CHECK(abs_spectral_norm(d, 50) == doctest::Approx(1.0));
  Rng rng(4);
  GenParams gp;
  gp.n = 16;
  CHECK(abs_spectral_norm(generate(Family::sign, gp, rng), 100) == doctest::Approx(16.0));
}

TEST_CASE("normalized distance bounds the unit distance") {
  Vector phi(2), tilde(2);
  phi << 1, 0;
  CHECK(normalized_distance(phi, phi) == 0.0);
  tilde << 1, 0.1;
  CHECK(normalized_distance(phi, tilde) >= unit_distance(phi, tilde));
  Rng rng(6);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 1000; ++trial) {
    Vector a(4), e(4);
    for (int i = 0; i < 4; ++i) {
      a(i) = g(rng);
      e(i) = 0.3 * g(rng);
    }
    const Vector b = a + e;
    if (a.dot(b) <= 0.0) continue;
    CHECK(normalized_distance(a, b) >= unit_distance(a, b) - 1e-12);
  }
  CHECK_THROWS_AS(normalized_distance(Vector::Zero(2), phi), InvalidArgument);
}
