#include <doctest.h>

#include <cmath>

#include "qgd/generate.hpp"
#include "qgd/matvec.hpp"

using namespace qgd;

TEST_CASE("family names round trip") {
  for (const auto& name : family_names()) CHECK(to_string(parse_family(name)) == name);
  CHECK_THROWS_AS(parse_family("nope"), InvalidArgument);
}

TEST_CASE("random psd matrices hit the requested condition number") {
  Rng rng(0);
  GenParams gp;
  gp.n = 8;
  gp.kappa = 4;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = generate(Family::random_psd, gp, rng);
    CHECK(asymmetry(a) <= 1e-12);
    const MatrixStats s = matrix_stats(a);
    REQUIRE(s.kappa.has_value());
    CHECK(std::abs(*s.kappa - 4.0) <= 0.4);
    CHECK(s.spectral == doctest::Approx(1.0));
  }
}

TEST_CASE("low rank") {
  Rng rng(1);
  GenParams gp;
  gp.n = 32;
  gp.rank = 2;
  const Matrix a = generate(Family::low_rank, gp, rng);
  CHECK(a.norm() <= std::sqrt(2.0) + 1e-12);
  const SpectralData s = svd(a);
  CHECK(s.singular_values(2) <= 1e-10 * s.singular_values(0));
}

TEST_CASE("sign matrices have unit entries") {
  Rng rng(2);
  GenParams gp;
  gp.n = 16;
  const Matrix a = generate(Family::sign, gp, rng);
  CHECK((a.cwiseAbs().array() == 1.0).all());
}

TEST_CASE("diagonal and identity") {
  Rng rng(3);
  GenParams gp;
  gp.n = 3;
  CHECK(generate(Family::identity, gp, rng) == Matrix::Identity(3, 3));
  gp.diagonal = {1.0, 0.5, 0.25};
  const Matrix d = generate(Family::diag, gp, rng);
  CHECK(d(2, 2) == 0.25);
  gp.diagonal.clear();
  gp.kappa = 4.0;
  const Vector g = generate(Family::diag, gp, rng).diagonal();
  CHECK(g(0) == doctest::Approx(1.0));
  CHECK(g(2) == doctest::Approx(0.25));
  CHECK(geometric_spectrum(3, 4.0)(1) == doctest::Approx(0.5));
}

TEST_CASE("random orthogonal") {
  Rng rng(4);
  const Matrix q = random_orthogonal(6, rng);
  CHECK((q.transpose() * q - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-12);
}
