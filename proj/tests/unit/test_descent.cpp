#include <doctest.h>

#include <cmath>

#include "qgd/descent.hpp"

using namespace qgd;

namespace {

Matrix diag2(double a, double b) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

GDConfig oracle_config(double alpha, std::size_t tau) {
  GDConfig c;
  c.alpha = alpha;
  c.tau = tau;
  c.mode = SveMode::oracle;
  return c;
}

}  // namespace

TEST_CASE("tau padding and default epsilon") {
  CHECK(padded_tau(1) == 1);
  CHECK(padded_tau(2) == 3);
  CHECK(padded_tau(3) == 3);
  CHECK(padded_tau(4) == 7);
  CHECK(padded_tau(100) == 127);
  GDConfig c;
  c.alpha = 0.5;
  c.tau = 3;
  c.delta = 0.09;
  CHECK(resolved_epsilon(c) == doctest::Approx(0.09 / (0.5 * 9)));
}

TEST_CASE("linear step halves an eigenvector of the identity") {
  const Vector e1 = Vector::Unit(2, 0);
  const GdProblem problem(Matrix::Identity(2, 2), e1);
  Rng rng(0);
  SveCounter counter;
  const StepResult s = step_v(1, e1, problem, oracle_config(0.5, 1), rng, counter);
  CHECK((s.good - e1 / 2).norm() <= 1e-12);
  CHECK(s.garbage_norm == doctest::Approx(std::sqrt(0.75)));
  CHECK(counter.sve_calls == 1);
}

TEST_CASE("U is the identity at t = 0 and matches V at t = 1") {
  const Vector b = Vector::Ones(2).normalized();
  const GdProblem problem(diag2(1.0, 0.5), b);
  const GDConfig cfg = oracle_config(0.5, 3);
  Rng rng(1);
  const IterateResult u0 = iterate_u(0, b, problem, cfg, rng);
  CHECK((u0.block - b).norm() == 0.0);
  CHECK(u0.sve_calls == 0);
  SveCounter counter;
  const StepResult v0 = step_v(0, b, problem, cfg, rng, counter);
  const IterateResult u1 = iterate_u(1, b, problem, cfg, rng);
  CHECK((u1.block - v0.good).norm() <= 1e-10);
  CHECK(u1.sve_calls == 2);
}

TEST_CASE("oracle history matches the classical recurrence") {
  const Matrix a = diag2(1.0, 0.5);
  const Vector b = Vector::Ones(2).normalized();
  const GdProblem problem(a, b);
  const GDConfig cfg = oracle_config(0.5, 3);
  Rng rng(2);
  const HistoryResult h = build_history(problem, b, cfg, rng);
  const ClassicalIterates it = classical_iterates(a, b, b, 0.5, h.tau);
  REQUIRE(h.blocks.size() == h.tau + 1);
  CHECK((h.blocks[0] - b).norm() == 0.0);
  for (std::size_t t = 1; t <= h.tau; ++t) CHECK((h.blocks[t] - 0.5 * it.residual[t - 1]).norm() <= 1e-10);
  CHECK((h.theta_tilde - it.theta.back()).norm() <= 1e-10);
  CHECK((h.extracted - it.theta.back()).norm() <= 1e-10);
  CHECK((h.output - it.theta.back().normalized()).norm() <= 1e-10);
  CHECK(h.success_amplitude == doctest::Approx(it.theta.back().norm() / (h.tau + 1)));
  CHECK(h.sve_calls_per_q == 2);
}

TEST_CASE("estimated linear step stays within epsilon of the exact one") {
  const Matrix a = diag2(1.0, 0.5);
  const GdProblem problem(a, Vector::Unit(2, 0));
  GDConfig cfg;
  cfg.alpha = 0.5;
  cfg.epsilon = 0.02;
  const Matrix exact = Matrix::Identity(2, 2) - cfg.alpha * a;
  Rng rng(3);
  const std::vector<double> mags{0.5, 1.0};
  for (int seed = 0; seed < 100; ++seed) {
    const auto est = estimate_singular_values(problem.walk(), problem.eigenvectors(), mags, {cfg.epsilon}, rng);
    const Matrix approx = step_operator(problem.eigenvectors(), est, cfg.alpha);
    CHECK((approx - exact).norm() <= cfg.epsilon);
  }
}

TEST_CASE("sequential schedule counts one estimation per step") {
  const Matrix a = diag2(1.0, 0.5);
  const Vector b = Vector::Ones(2).normalized();
  const GdProblem problem(a, b);
  const GDConfig cfg = oracle_config(0.5, 7);
  Rng rng(4);
  const AffineFn affine = [&](Rng&) { return AffineStep{b - a * b, true}; };
  const StepFn step = [&](std::size_t, Rng&) { return LinearStep{Matrix::Identity(2, 2) - 0.5 * a, true}; };
  const HistoryResult seq = run_history(2, b, affine, step, Schedule::sequential, cfg, rng);
  const HistoryResult fast = run_history(2, b, affine, step, Schedule::fast, cfg, rng);
  CHECK(seq.sve_calls_per_q == 7);
  CHECK(fast.sve_calls_per_q == 2);
  CHECK((seq.theta_tilde - fast.theta_tilde).norm() <= 1e-12);
}

TEST_CASE("descent rejects invalid configurations") {
  const GdProblem problem(Matrix::Identity(2, 2), Vector::Unit(2, 0));
  Rng rng(5);
  GDConfig cfg;
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(build_history(problem, Vector::Unit(2, 0), cfg, rng), InvalidArgument);
  CHECK_THROWS_AS(GdProblem(Matrix::Identity(2, 2), Vector::Ones(2)), InvalidArgument);
  GDConfig big = oracle_config(0.5, 1 << 20);
  CHECK_THROWS_AS(build_history(problem, Vector::Unit(2, 0), big, rng), CapacityError);
}
