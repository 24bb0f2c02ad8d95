#include "qgd/descent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace qgd {

namespace {

constexpr double kBlockSlack = 1e-12;

LinearStep linear_step(const GdProblem& problem, const GDConfig& cfg, Rng& rng) {
  SveConfig sc{resolved_epsilon(cfg), cfg.mode, cfg.reps, cfg.cap};
  const Vector& lam = problem.eigenvalues();
  std::vector<double> mags(static_cast<std::size_t>(lam.size()));
  for (Eigen::Index i = 0; i < lam.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(lam(i));
  const auto est = estimate_singular_values(problem.walk(), problem.eigenvectors(), mags, sc, rng);
  LinearStep out{step_operator(problem.eigenvectors(), est, cfg.alpha), true};
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if (std::abs(est[i] - mags[i]) > sc.delta) out.success = false;
  }
  return out;
}

AffineStep affine_step(const GdProblem& problem, const Vector& r, const GDConfig& cfg, Rng& rng) {
  SveConfig sc{1.0, cfg.mode, cfg.reps, cfg.cap};
  const AffineResult r1 = affine_apply(problem.affine(), r, 1.0, resolved_epsilon(cfg) / std::numbers::sqrt2, sc, rng);
  return {r1.value, r1.all_success};
}

double garbage(double total_sq, const Vector& good) {
  return std::sqrt(std::max(0.0, total_sq - good.squaredNorm()));
}

}  // namespace

std::size_t padded_tau(std::size_t tau) { return std::bit_ceil(std::max<std::size_t>(tau, 1) + 1) - 1; }

double resolved_epsilon(const GDConfig& cfg) {
  if (cfg.epsilon > 0.0) return cfg.epsilon;
  const auto tau = static_cast<double>(padded_tau(cfg.tau));
  return cfg.delta / (cfg.alpha * tau * tau);
}

void validate(const GDConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  if (cfg.epsilon < 0.0 || !std::isfinite(cfg.epsilon)) throw InvalidArgument("epsilon must be nonnegative");
  if (cfg.epsilon == 0.0 && !(cfg.delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (cfg.reps < 1) throw InvalidArgument("reps must be >= 1");
  if (!(cfg.norm_precision > 0.0 && cfg.norm_precision < 1.0)) throw InvalidArgument("norm precision must lie in (0, 1)");
}

ClassicalIterates classical_iterates(const Matrix& a, const Vector& b, const Vector& r0, double alpha, std::size_t tau) {
  if (a.rows() != a.cols() || a.rows() != b.size() || b.size() != r0.size()) {
    throw InvalidArgument("classical_iterates: dimension mismatch");
  }
  ClassicalIterates it;
  it.theta.push_back(r0);
  it.residual.push_back(b - a * r0);
  for (std::size_t t = 0; t < tau; ++t) {
    it.theta.push_back(it.theta.back() + alpha * it.residual.back());
    it.residual.push_back(b - a * it.theta.back());
  }
  return it;
}

GdProblem::GdProblem(Matrix a, Vector b, double p)
    : a_(std::move(a)),
      b_(std::move(b)),
      walk_(build_walk(StorePair::from_matrix(a_, p))),
      affine_(affine_walk(a_, b_, p)) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size()) throw InvalidArgument("GdProblem: A must be square and match b");
  if (asymmetry(a_) > 1e-10 * std::max(1.0, a_.cwiseAbs().maxCoeff())) throw InvalidArgument("GdProblem: A must be symmetric");
  if (std::abs(b_.norm() - 1.0) > 1e-10) throw InvalidArgument("GdProblem: b must be a unit vector");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a_);
  if (eig.info() != Eigen::Success) throw NumericalError("GdProblem: eigendecomposition failed");
  vectors_ = eig.eigenvectors();
  values_ = eig.eigenvalues();
}

Matrix step_operator(const Matrix& vectors, std::span<const double> lambda_bar, double alpha) {
  if (static_cast<std::size_t>(vectors.cols()) != lambda_bar.size()) throw InvalidArgument("step_operator: size mismatch");
  Vector d(vectors.cols());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = 1.0 - alpha * std::clamp(lambda_bar[static_cast<std::size_t>(i)], 0.0, 1.0);
  return vectors * d.asDiagonal() * vectors.transpose();
}

StepResult step_v(std::size_t t, const Vector& r, const GdProblem& problem, const GDConfig& cfg, Rng& rng,
                  SveCounter& counter) {
  validate(cfg);
  if (static_cast<std::size_t>(r.size()) != problem.n()) throw InvalidArgument("step_v: vector has the wrong dimension");
  StepResult out;
  if (t == 0) {
    const AffineStep l = affine_step(problem, r, cfg, rng);
    ++counter.affine_calls;
    if (cfg.alpha * l.value.norm() > 1.0) throw InvalidArgument("step_v: alpha ||L(r0)|| exceeds 1; reduce alpha");
    out.good = cfg.alpha * l.value;
    out.success = l.success;
  } else {
    const LinearStep s = linear_step(problem, cfg, rng);
    ++counter.sve_calls;
    out.good = s.op * r;
    out.success = s.success;
  }
  out.garbage_norm = garbage(r.squaredNorm(), out.good);
  return out;
}

IterateResult iterate_u(std::size_t t, const Vector& r0, const GdProblem& problem, const GDConfig& cfg, Rng& rng) {
  validate(cfg);
  if (static_cast<std::size_t>(r0.size()) != problem.n()) throw InvalidArgument("iterate_u: vector has the wrong dimension");
  IterateResult out;
  if (t == 0) {
    out.block = r0;
    return out;
  }
  const AffineStep l = affine_step(problem, r0, cfg, rng);
  if (cfg.alpha * l.value.norm() > 1.0) throw InvalidArgument("iterate_u: alpha ||L(r0)|| exceeds 1; reduce alpha");
  const LinearStep s = linear_step(problem, cfg, rng);
  out.sve_calls = 2;
  // Powers of the estimated rotation: one estimation serves every t.
  Vector v = l.value;
  for (std::size_t k = 1; k < t; ++k) v = s.op * v;
  out.block = cfg.alpha * v;
  out.garbage_norm = garbage(r0.squaredNorm(), out.block);
  out.success = l.success && s.success;
  return out;
}

HistoryResult run_history(std::size_t n, const Vector& r0, const AffineFn& affine, const StepFn& step, Schedule schedule,
                          const GDConfig& cfg, Rng& rng) {
  validate(cfg);
  if (static_cast<std::size_t>(r0.size()) != n) throw InvalidArgument("run_history: r0 has the wrong dimension");
  if (std::abs(r0.norm() - 1.0) > 1e-10) throw InvalidArgument("run_history: r0 must be a unit vector");
  HistoryResult out;
  out.tau = padded_tau(cfg.tau);
  out.alpha = cfg.alpha;
  out.epsilon = resolved_epsilon(cfg);
  const std::size_t steps = out.tau + 1;
  out.history_dim = steps * (n + 1) * 2;
  if (out.history_dim > cfg.cap) {
    throw CapacityError("history state of " + std::to_string(out.history_dim) + " amplitudes exceeds the simulation cap");
  }

  const AffineStep l = affine(rng);
  if (cfg.alpha * l.value.norm() > 1.0) throw InvalidArgument("history: alpha ||L(r0)|| exceeds 1; reduce alpha");
  out.all_success = l.success;
  out.blocks.push_back(r0);
  Vector current = l.value;
  out.blocks.push_back(cfg.alpha * current);
  std::size_t calls = 1;
  Matrix shared;
  if (schedule == Schedule::fast && out.tau > 1) {
    const LinearStep s = step(1, rng);
    shared = s.op;
    out.all_success = out.all_success && s.success;
    ++calls;
  }
  for (std::size_t t = 2; t <= out.tau; ++t) {
    if (schedule == Schedule::fast) {
      current = shared * current;
    } else {
      const LinearStep s = step(t - 1, rng);
      out.all_success = out.all_success && s.success;
      ++calls;
      current = s.op * current;
    }
    out.blocks.push_back(cfg.alpha * current);
  }
  out.sve_calls_per_q = calls;

  out.theta_tilde = Vector::Zero(static_cast<Eigen::Index>(n));
  for (const auto& blk : out.blocks) out.theta_tilde += blk;

  // |t>|block_t>|0> + |t>|garbage>|1>, the garbage on the reserved label n.
  const double inv = 1.0 / std::sqrt(static_cast<double>(steps));
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(out.history_dim));
  for (std::size_t t = 0; t < steps; ++t) {
    const Vector& blk = out.blocks[t];
    const double sq = blk.squaredNorm();
    if (sq > 1.0 + kBlockSlack) throw NumericalError("history: block norm exceeds 1");
    for (std::size_t i = 0; i < n; ++i) amps(static_cast<Eigen::Index>((t * (n + 1) + i) * 2)) = blk(static_cast<Eigen::Index>(i)) * inv;
    amps(static_cast<Eigen::Index>((t * (n + 1) + n) * 2 + 1)) = std::sqrt(std::max(0.0, 1.0 - sq)) * inv;
  }
  const PureState history({{"time", steps}, {"vector", n + 1}, {"flag", 2}}, amps);
  const PureState erased = history.walsh_hadamard("time");
  const Amplified amp = amplitude_amplify(erased, {{"time", 0}, {"flag", 0}});

  out.success_amplitude = amp.amplitude;
  out.expected_repetitions = amp.expected_repetitions;
  out.extracted = (amp.state.amplitudes().real() * amp.amplitude * static_cast<double>(steps)).head(static_cast<Eigen::Index>(n));
  out.output = amp.state.amplitudes().real().head(static_cast<Eigen::Index>(n));
  const AmplitudeEstimate ae = amplitude_estimate(amp.amplitude * amp.amplitude, cfg.norm_precision, rng, cfg.reps);
  out.norm_estimate = static_cast<double>(steps) * std::sqrt(ae.estimate);
  if (out.norm_estimate < cfg.norm_floor) {
    throw NumericalError("history: estimated ||theta_tau|| = " + std::to_string(out.norm_estimate) +
                         " is below the amplification floor");
  }
  out.total_sve_calls = static_cast<std::size_t>(std::ceil(out.expected_repetitions)) * out.sve_calls_per_q;
  return out;
}

HistoryResult build_history(const GdProblem& problem, const Vector& r0, const GDConfig& cfg, Rng& rng) {
  const AffineFn affine = [&](Rng& g) { return affine_step(problem, r0, cfg, g); };
  const StepFn step = [&](std::size_t, Rng& g) { return linear_step(problem, cfg, g); };
  return run_history(problem.n(), r0, affine, step, Schedule::fast, cfg, rng);
}

}  // namespace qgd
