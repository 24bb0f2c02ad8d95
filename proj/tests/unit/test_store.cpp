#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qgd/store.hpp"

using namespace qgd;

TEST_CASE("3-4-5 insert and overwrite") {
  MatrixStore s(1, 2);
  s.insert({1, 1, 3.0});
  s.insert({1, 2, 4.0});
  CHECK(s.row_norm_sq(0) == doctest::Approx(25.0));
  CHECK(s.max_norm_sq() == doctest::Approx(25.0));
  s.insert({1, 1, 0.0});
  CHECK(s.row_norm_sq(0) == doctest::Approx(16.0));
  // M is a running maximum.
  CHECK(s.max_norm_sq() == doctest::Approx(25.0));
  CHECK(s.tree(0).max_inconsistency() <= 1e-12);
}

TEST_CASE("out of range index") {
  MatrixStore s(2, 2);
  CHECK_THROWS_AS(s.insert({3, 1, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(s.insert({1, 0, 1.0}), InvalidArgument);
}

TEST_CASE("insert touches at most ceil(log2 n) + 2 nodes") {
  Rng rng(11);
  std::uniform_int_distribution<std::size_t> idx(1, 64);
  std::normal_distribution<double> g;
  MatrixStore s(64, 64);
  for (int k = 0; k < 2000; ++k) CHECK(s.insert({idx(rng), idx(rng), g(rng)}) <= 8);
  CHECK(s.touch_limit() == 8);
  CHECK(s.max_touches() <= 8);
}

TEST_CASE("row states") {
  MatrixStore s(2, 2);
  s.insert({1, 1, 3.0});
  s.insert({1, 2, 4.0});
  Vector r = s.prepare_row_state(0);
  CHECK(r(0) == doctest::Approx(0.6));
  CHECK(r(1) == doctest::Approx(0.8));
  CHECK(r(2) == doctest::Approx(0.0));

  s.insert({2, 1, 5.0});
  s.insert({2, 2, 5.0});
  r = s.prepare_row_state(0);
  CHECK(r(0) == doctest::Approx(3.0 / std::sqrt(50.0)));
  CHECK(r(1) == doctest::Approx(4.0 / std::sqrt(50.0)));
  CHECK(r(2) == doctest::Approx(5.0 / std::sqrt(50.0)));

  MatrixStore n(1, 2);
  n.insert({1, 1, -1.0});
  n.insert({1, 2, 1.0});
  r = n.prepare_row_state(0);
  CHECK(r(0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(r(1) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(r(2) == doctest::Approx(0.0));

  CHECK_THROWS_AS(MatrixStore(1, 2).prepare_row_state(0), InvalidArgument);
}

TEST_CASE("weighted row states") {
  WeightedStore a(1, 2);
  a.insert({1, 1, 3.0});
  a.insert({1, 2, 4.0});
  Vector r = a.prepare_weighted_row_state(0);
  CHECK(r(0) == doctest::Approx(0.6));
  CHECK(r(1) == doctest::Approx(0.8));
  a.set_weight(0, 4.0);
  CHECK(a.max_weighted_norm_sq() == doctest::Approx(100.0));
  r = a.prepare_weighted_row_state(0);
  CHECK(r(0) == doctest::Approx(0.6));
  CHECK(r(1) == doctest::Approx(0.8));
  CHECK(r(2) == doctest::Approx(0.0));

  WeightedStore b(2, 2);
  b.insert({1, 1, 1.0});
  b.insert({2, 2, 1.0});
  b.set_weight(1, 4.0);
  CHECK(b.max_weighted_norm_sq() == doctest::Approx(4.0));
  r = b.prepare_weighted_row_state(0);
  CHECK(r(0) == doctest::Approx(0.5));
  CHECK(r(1) == doctest::Approx(0.0));
  CHECK(r(2) == doctest::Approx(std::sqrt(3.0) / 2.0));
  CHECK_THROWS_AS(b.set_weight(0, 0.0), InvalidArgument);
}

TEST_CASE("batched build equals sequential inserts in any order") {
  Rng rng(12);
  std::uniform_int_distribution<std::size_t> idx(1, 8);
  std::normal_distribution<double> g;
  std::vector<CoordEntry> entries;
  for (int k = 0; k < 40; ++k) entries.push_back({idx(rng), idx(rng), g(rng)});
  // Distinct positions so that order does not matter for the final values.
  std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) { return std::pair(x.i, x.j) < std::pair(y.i, y.j); });
  entries.erase(std::unique(entries.begin(), entries.end(), [](const auto& x, const auto& y) { return x.i == y.i && x.j == y.j; }),
                entries.end());
  const MatrixStore batched = MatrixStore::from_stream(entries, 8, 8);
  MatrixStore seq(8, 8);
  for (const auto& e : entries) seq.insert(e);
  CHECK((batched.to_dense() - seq.to_dense()).cwiseAbs().maxCoeff() == 0.0);
  std::shuffle(entries.begin(), entries.end(), rng);
  const MatrixStore shuffled = MatrixStore::from_stream(entries, 8, 8);
  CHECK((shuffled.to_dense() - seq.to_dense()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(shuffled.max_norm_sq() == doctest::Approx(seq.max_norm_sq()));
}

TEST_CASE("json round trip") {
  Matrix a(3, 4);
  a << 1, 0, -2, 0, 0, 0.5, 0, 0, 3, -1, 0, 0.25;
  const MatrixStore s = MatrixStore::from_matrix(a);
  const MatrixStore back = MatrixStore::from_json(s.to_json());
  CHECK((back.to_dense() - a).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.max_norm_sq() == s.max_norm_sq());

  WeightedStore w(2, 2);
  w.insert({1, 2, 2.0});
  w.insert({2, 1, -1.0});
  w.set_weight(1, 3.0);
  const WeightedStore wb = WeightedStore::from_json(w.to_json());
  CHECK((wb.to_dense() - w.to_dense()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(wb.weight(1) == 3.0);
}

TEST_CASE("store pair mu matches the factorization") {
  Matrix d(2, 2);
  d << 1, 0, 0, 0.5;
  CHECK(StorePair::from_matrix(d, 0.5).mu() == doctest::Approx(1.0));
}
