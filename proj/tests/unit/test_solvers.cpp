#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "qgd/generate.hpp"
#include "qgd/solvers.hpp"

using namespace qgd;

namespace {

Matrix diag2(double a, double b) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

WalkOperator walk_of(const Matrix& a) { return build_walk(StorePair::from_matrix(a, 0.5)); }

}  // namespace

TEST_CASE("multiply") {
  Rng rng(0);
  const Vector x = Vector::Ones(2).normalized();
  const SolveReport id = multiply(walk_of(Matrix::Identity(2, 2)), x, 0.01, 1.0, {}, rng);
  CHECK((id.z - x).norm() <= 1e-12);
  CHECK(id.success_probability == doctest::Approx(1.0));

  const Matrix d = diag2(1.0, 0.5);
  const SolveReport r = multiply(walk_of(d), x, 0.01, 2.0, {}, rng);
  Vector expect(2);
  expect << 1.0, 0.5;
  expect /= std::sqrt(1.25);
  CHECK((r.reference - expect).norm() <= 1e-12);
  CHECK((r.z - expect).norm() <= std::sqrt(2.0) * 0.01 * 2);
}

TEST_CASE("multiply on random psd matrices stays within the bound") {
  Rng rng(1);
  GenParams gp;
  gp.n = 8;
  gp.kappa = 4;
  int ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = generate(Family::random_psd, gp, rng);
    const Vector x = Vector::Random(8).normalized();
    const SolveReport r = multiply(walk_of(a), x, 0.01, 4.0, {}, rng);
    const Vector oracle = (a * x).normalized();
    if ((r.z - oracle).norm() <= r.bound || !r.all_success) ++ok;
  }
  CHECK(ok == 100);
}

TEST_CASE("solve") {
  Rng rng(2);
  const Vector b = Vector::Ones(2).normalized();
  const SolveReport id = solve(walk_of(Matrix::Identity(2, 2)), b, 0.01, 1.0, {}, rng);
  CHECK((id.z - b).norm() <= 1e-12);

  const SolveReport r = solve(walk_of(diag2(1.0, 0.5)), b, 0.01, 2.0, {}, rng);
  Vector expect(2);
  expect << 1.0, 2.0;
  expect /= std::sqrt(5.0);
  CHECK((r.reference - expect).norm() <= 1e-12);
  CHECK(r.distance <= r.bound);

  CHECK_THROWS_AS(solve(walk_of(diag2(1.0, 0.5)), b, 0.3, 2.0, {}, rng), InvalidArgument);
}

TEST_CASE("solve on random psd matrices stays within the bound") {
  Rng rng(3);
  GenParams gp;
  gp.n = 8;
  gp.kappa = 4;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = generate(Family::random_psd, gp, rng);
    const Vector b = Vector::Random(8).normalized();
    const SolveReport r = solve(walk_of(a), b, 0.05, 4.0, {}, rng);
    const Vector oracle = a.ldlt().solve(b).normalized();
    if (r.all_success) CHECK((r.z - oracle).norm() <= 2 * std::sqrt(2.0) * 4 * 0.05);
  }
}

TEST_CASE("solve success amplitude matches the analytic value") {
  Rng rng(4);
  const Matrix d = diag2(1.0, 0.5);
  const Vector b = Vector::Ones(2).normalized();
  const SolveReport r = solve(walk_of(d), b, 0.01, 2.0, {0.01, SveMode::oracle}, rng);
  // beta_i^2 (lambda_min / lambda_i)^2 with lambda_min = 1/kappa.
  const double expect = 0.5 * 0.25 + 0.5 * 1.0;
  CHECK(r.success_probability == doctest::Approx(expect));
  CHECK(r.expected_repetitions == doctest::Approx(1.0 / std::sqrt(expect)).epsilon(1e-9));
}

TEST_CASE("affine map") {
  Rng rng(5);
  const Vector e1 = Vector::Unit(2, 0);
  const Vector x = Vector::Ones(2).normalized();
  {
    const AffineResult r = affine_apply(affine_walk(diag2(1.0, 0.5), e1), Vector::Zero(2), 1.0, 0.05, {}, rng);
    CHECK((r.value - e1).norm() <= 0.05);
    CHECK(r.reference.norm() == doctest::Approx(1.0));
  }
  {
    const AffineResult r = affine_apply(affine_walk(Matrix::Identity(2, 2), e1), e1, 1.0, 0.05, {}, rng);
    CHECK(r.zero_norm);
  }
  {
    const Matrix d = diag2(1.0, 0.5);
    const AffineResult r = affine_apply(affine_walk(d, e1), x, 1.0, 0.05, {}, rng);
    CHECK((r.reference - (e1 - d * x)).norm() <= 1e-12);
    CHECK(r.error <= 0.05);
    const AffineResult o = affine_apply(affine_walk(d, e1), x, 1.0, 0.05, {0.05, SveMode::oracle}, rng);
    CHECK((o.value - (e1 - d * x)).norm() <= 1e-10);
  }
}

TEST_CASE("spectral norm estimate") {
  Rng rng(6);
  const SpectralNormResult d = spectral_norm_estimate(diag2(1.0, 0.5), 0.05, 0.1, {}, rng);
  CHECK(d.eta == doctest::Approx(1.0 / std::sqrt(1.25)));
  CHECK(std::abs(d.estimate - d.eta) <= 0.05);
  for (std::size_t k = 1; k < d.trace.size(); ++k) {
    CHECK(d.trace[k].u - d.trace[k].l == doctest::Approx((d.trace[k - 1].u - d.trace[k - 1].l) / 2));
  }

  const SpectralNormResult r1 = spectral_norm_estimate(Matrix::Ones(3, 3), 0.05, 0.1, {}, rng);
  CHECK(r1.eta == doctest::Approx(1.0));
  CHECK(r1.estimate >= 1.0 - 0.05);

  const SpectralNormResult i4 = spectral_norm_estimate(Matrix::Identity(4, 4), 0.05, 0.1, {}, rng);
  CHECK(i4.eta == doctest::Approx(0.5));
  CHECK(std::abs(i4.estimate - 0.5) <= 0.05);
}

TEST_CASE("normalize_matrix brings the spectral norm to at most 1") {
  Rng rng(7);
  const NormalizedMatrix n = normalize_matrix(3.0 * diag2(1.0, 0.5), 0.05, {}, rng);
  CHECK(n.certified);
  CHECK(n.spectral_norm <= 1.0);
  CHECK(n.spectral_norm >= 0.8);
  CHECK_THROWS_AS(normalize_matrix(Matrix::Zero(2, 2), 0.05, {}, rng), InvalidArgument);
}
