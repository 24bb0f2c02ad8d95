#include "qgd/apps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "qgd/matvec.hpp"
#include "qgd/solvers.hpp"
#include "qgd/store.hpp"

namespace qgd {

namespace {

constexpr double kZeroNorm = 1e-12;
constexpr double kNormDeltaRel = 0.1;

SveConfig sve_base(const AppConfig& cfg) { return {cfg.delta, cfg.mode, cfg.reps, cfg.cap}; }

GDConfig gd_config(const AppConfig& cfg, std::size_t tau) {
  GDConfig g;
  g.alpha = cfg.alpha;
  g.tau = tau;
  g.delta = cfg.delta;
  g.mode = cfg.mode;
  g.reps = cfg.reps;
  g.norm_floor = cfg.norm_floor;
  g.norm_precision = cfg.norm_precision;
  g.cap = cfg.cap;
  return g;
}

double smallest_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  return eig.eigenvalues()(0);
}

double resolve_kappa(const AppConfig& cfg, const Matrix& normalized) {
  if (cfg.kappa) return *cfg.kappa;
  const double lmin = smallest_eigenvalue(normalized);
  if (!(lmin > kZeroNorm)) throw NumericalError("matrix is not positive definite after normalization");
  return std::max(1.0, 1.0 / lmin);
}

Vector direct_solve(const Matrix& a, const Vector& b) {
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  if (qr.rank() < a.cols()) throw NumericalError("oracle solve: matrix is singular");
  return qr.solve(b);
}

// Error ledger and oracle comparisons shared by every application.
void fill_ledger(AppReport& rep, const Vector& theta, const Vector& optimum, const Vector& r0) {
  const HistoryResult& h = rep.history;
  const double tau = static_cast<double>(h.tau);
  rep.theta = theta;
  rep.z = h.output;
  rep.ledger_error = (theta - h.theta_tilde).norm();
  rep.ledger_bound = h.alpha * tau * tau * h.epsilon;
  rep.state_error = unit_distance(h.theta_tilde, theta);
  rep.state_bound = std::numbers::sqrt2 * rep.ledger_bound / theta.norm();
  rep.classical_error = (theta - optimum).norm();
  rep.classical_bound = std::pow(1.0 - h.alpha / rep.kappa, tau) * (optimum - r0).norm();
  rep.optimum_distance = unit_distance(rep.z, optimum);
  rep.all_success = h.all_success;
}

// Affine part of the weighted problems, b - A r with b = X^T W y / ||X^T W y||
// and A = c (X^T W X + lambda I), in two estimated stages: g = y/||X^T W y|| - c X r
// from a walk over [[-cX, y/||X^T W y||], [0, 0]], then X^T W g from a walk
// over X^T W. Each stage gets half of the error budget.
class WeightedAffine {
 public:
  WeightedAffine(const WLSInstance& inst, double c, double p)
      : xtw_(inst.x.transpose() * inst.w.asDiagonal()),
        xtw_norm_(xtw_.norm()),
        c_(c),
        lambda_(inst.lambda),
        stage1_(affine_walk(c * inst.x, inst.y / inst.rhs().norm(), p)),
        stage2_(build_walk(StorePair::from_matrix(xtw_, p))) {}

  AffineStep operator()(const Vector& r, double epsilon, const SveConfig& base, Rng& rng) const {
    const double e = epsilon / std::numbers::sqrt2;
    const AffineResult g = affine_apply(stage1_, r, 1.0, e / (2.0 * xtw_norm_), base, rng);
    AffineStep out{Vector::Zero(r.size()), g.all_success};
    if (!g.zero_norm) {
      const ApplyResult h = apply_via_sve(stage2_, g.value, e / (2.0 * g.norm), base, rng);
      out.value = h.value;
      out.success = out.success && h.outcome.all_success();
    }
    out.value -= c_ * lambda_ * r;
    return out;
  }

 private:
  Matrix xtw_;
  double xtw_norm_;
  double c_;
  double lambda_;
  WalkOperator stage1_;
  WalkOperator stage2_;
};

// One batch of the linear part: eigenvalues c (sigma^2 + lambda) of
// A_j = c (B_j^T B_j + lambda I) from an SVE of B_j.
struct BatchStep {
  WalkOperator walk;
  Matrix right;
  std::vector<double> sigmas;
  std::vector<double> lambdas;

  LinearStep operator()(double c, double lambda, double epsilon, double alpha, const SveConfig& base, Rng& rng) const {
    SveConfig sc = base;
    sc.delta = std::min(epsilon / (c * (2.0 * walk.mu() + 1.0)), 1.0);
    const auto est = estimate_singular_values(walk, right, sigmas, sc, rng);
    std::vector<double> bar(est.size());
    LinearStep out;
    for (std::size_t i = 0; i < est.size(); ++i) {
      bar[i] = c * (est[i] * est[i] + lambda);
      if (std::abs(bar[i] - lambdas[i]) > epsilon) out.success = false;
    }
    out.op = step_operator(right, bar, alpha);
    return out;
  }
};

AppReport run_weighted(const WLSInstance& inst, const PartitionPlan& plan, Schedule schedule, const AppConfig& cfg,
                       Rng& rng) {
  const std::size_t k = plan.k();
  const auto n = static_cast<Eigen::Index>(inst.n());
  const Matrix b_full = inst.weighted();
  const SveConfig base = sve_base(cfg);

  std::vector<Matrix> blocks;
  double top = 0.0;
  for (const auto& rows : plan.batches) {
    Matrix bj(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t r = 0; r < rows.size(); ++r) bj.row(static_cast<Eigen::Index>(r)) = b_full.row(static_cast<Eigen::Index>(rows[r]));
    bj *= std::sqrt(static_cast<double>(k));
    if (!(bj.norm() > 0.0)) throw InvalidArgument("batch has an all-zero weighted block");
    const SpectralNormResult sn = spectral_norm_estimate(bj, cfg.norm_epsilon, kNormDeltaRel, base, rng);
    const double v = (sn.estimate + cfg.norm_epsilon) * bj.norm();
    top = std::max(top, v * v);
    blocks.push_back(std::move(bj));
  }
  const double c = 1.0 / (top + inst.lambda);
  const Matrix identity = Matrix::Identity(n, n);
  const Matrix a = c * (b_full.transpose() * b_full + inst.lambda * identity);
  const Vector rhs = inst.rhs();
  const Vector b = rhs / rhs.norm();

  AppReport rep;
  rep.scale = c;
  rep.kappa = resolve_kappa(cfg, a);
  const GDConfig g = gd_config(cfg, cfg.tau ? cfg.tau : steps_for(rep.kappa, cfg.delta, cfg.alpha));
  const double eps = resolved_epsilon(g);

  std::vector<BatchStep> steps;
  std::vector<Matrix> batch_a;
  for (const Matrix& bj : blocks) {
    const FullRightBasis fr = svd_full_right(bj);
    BatchStep s{build_walk(StorePair::from_matrix(bj, cfg.p)), fr.right, {}, {}};
    for (Eigen::Index i = 0; i < n; ++i) {
      s.sigmas.push_back(fr.singular_values(i));
      s.lambdas.push_back(c * (fr.singular_values(i) * fr.singular_values(i) + inst.lambda));
    }
    rep.batch_mu.push_back(s.walk.mu());
    batch_a.push_back(c * (bj.transpose() * bj + inst.lambda * identity));
    rep.normalized = rep.normalized && svd(batch_a.back()).singular_values(0) <= 1.0 + 1e-12;
    steps.push_back(std::move(s));
  }
  rep.mu = *std::max_element(rep.batch_mu.begin(), rep.batch_mu.end());

  const WeightedAffine affine(inst, c, cfg.p);
  const Vector& r0 = b;
  const AffineFn affine_fn = [&](Rng& gen) { return affine(r0, eps, base, gen); };
  const StepFn step_fn = [&](std::size_t s, Rng& gen) {
    return steps[(s - 1) % k](c, inst.lambda, eps, cfg.alpha, base, gen);
  };
  rep.history = run_history(inst.n(), r0, affine_fn, step_fn, schedule, g, rng);

  // Exact cyclic recurrence: block 1 is L(r0), block t applies A_{(t-2) mod k}.
  Vector grad = b - a * r0;
  Vector theta = r0 + cfg.alpha * grad;
  for (std::size_t t = 2; t <= rep.history.tau; ++t) {
    grad -= cfg.alpha * (batch_a[(t - 2) % k] * grad);
    theta += cfg.alpha * grad;
  }
  const Vector optimum = direct_solve(a, b);
  fill_ledger(rep, theta, optimum, r0);
  if (k == 1) {
    rep.reference = optimum.normalized();
    rep.bound = 2.0 * cfg.delta;
    rep.bound_formula = "2*delta";
  } else {
    rep.reference = theta.normalized();
    rep.bound = rep.state_bound;
    rep.bound_formula = "sqrt(2)*alpha*tau^2*epsilon/||theta_tau||";
  }
  rep.distance = (rep.z - rep.reference).norm();
  return rep;
}

}  // namespace

void validate(const AppConfig& cfg) {
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  if (cfg.kappa && !(*cfg.kappa >= 1.0 && std::isfinite(*cfg.kappa))) throw InvalidArgument("kappa must be >= 1");
  if (!(cfg.norm_epsilon > 0.0 && cfg.norm_epsilon < 1.0)) throw InvalidArgument("norm epsilon must lie in (0, 1)");
  if (!(cfg.p >= 0.0 && cfg.p <= 1.0)) throw InvalidArgument("p must lie in [0, 1]");
  if (cfg.reps < 1) throw InvalidArgument("reps must be >= 1");
}

std::size_t steps_for(double kappa, double delta, double alpha) {
  if (!(kappa >= 1.0) || !(delta > 0.0) || !(alpha > 0.0)) throw InvalidArgument("steps_for: invalid parameters");
  const double t = std::ceil(kappa * std::log(kappa / delta) / alpha);
  return t < 1.0 ? 1 : static_cast<std::size_t>(t);
}

AppReport gd_linear_solve(const Matrix& a, const Vector& b, const AppConfig& cfg, Rng& rng) {
  validate(cfg);
  validate_matrix(a);
  if (a.rows() != a.cols() || a.rows() != b.size()) throw InvalidArgument("gd_linear_solve: A must be square and match b");
  if (asymmetry(a) > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff())) throw InvalidArgument("gd_linear_solve: A must be symmetric");
  if (!b.allFinite() || !(b.norm() > 0.0)) throw InvalidArgument("gd_linear_solve: b must be nonzero");
  const SveConfig base = sve_base(cfg);
  const NormalizedMatrix nm = normalize_matrix(a, cfg.norm_epsilon, base, rng);
  const Vector bu = b / b.norm();

  AppReport rep;
  rep.scale = nm.scale;
  rep.normalized = nm.certified;
  rep.kappa = resolve_kappa(cfg, nm.scaled);
  const GDConfig g = gd_config(cfg, cfg.tau ? cfg.tau : steps_for(rep.kappa, cfg.delta, cfg.alpha));
  const GdProblem problem(nm.scaled, bu, cfg.p);
  rep.mu = problem.walk().mu();
  rep.batch_mu = {rep.mu};
  rep.history = build_history(problem, bu, g, rng);
  const ClassicalIterates it = classical_iterates(nm.scaled, bu, bu, cfg.alpha, rep.history.tau);
  const Vector optimum = direct_solve(nm.scaled, bu);
  fill_ledger(rep, it.theta.back(), optimum, bu);
  rep.reference = optimum.normalized();
  rep.distance = (rep.z - rep.reference).norm();
  rep.bound = 2.0 * cfg.delta;
  rep.bound_formula = "2*delta";
  return rep;
}

Matrix WLSInstance::weighted() const { return w.cwiseSqrt().asDiagonal() * x; }

Vector WLSInstance::rhs() const { return x.transpose() * w.cwiseProduct(y); }

Vector WLSInstance::closed_form() const {
  const Matrix b = weighted();
  const Matrix a = b.transpose() * b + lambda * Matrix::Identity(x.cols(), x.cols());
  return direct_solve(a, rhs());
}

void validate(const WLSInstance& inst) {
  validate_matrix(inst.x);
  if (inst.w.size() != inst.x.rows() || inst.y.size() != inst.x.rows()) {
    throw InvalidArgument("WLS instance: w and y must have one entry per row of X");
  }
  if (!inst.w.allFinite() || !inst.y.allFinite()) throw InvalidArgument("WLS instance: non-finite weight or outcome");
  if ((inst.w.array() <= 0.0).any()) throw InvalidArgument("WLS instance: weights must be positive");
  if (!(inst.lambda >= 0.0) || !std::isfinite(inst.lambda)) throw InvalidArgument("WLS instance: lambda must be >= 0");
  if (!(inst.rhs().norm() > 0.0)) throw InvalidArgument("WLS instance: X^T W y is zero");
}

void PartitionPlan::validate(std::size_t m) const {
  if (batches.empty()) throw InvalidArgument("partition has no batches");
  std::vector<bool> seen(m, false);
  std::size_t count = 0;
  for (const auto& b : batches) {
    if (b.empty()) throw InvalidArgument("partition has an empty batch");
    for (std::size_t i : b) {
      if (i >= m) throw InvalidArgument("partition row index " + std::to_string(i) + " out of range");
      if (seen[i]) throw InvalidArgument("partition row " + std::to_string(i) + " appears twice");
      seen[i] = true;
      ++count;
    }
  }
  if (count != m) throw InvalidArgument("partition does not cover every row");
}

PartitionPlan PartitionPlan::contiguous(std::size_t m, std::size_t k) {
  if (k == 0 || k > m) throw InvalidArgument("partition: need 1 <= k <= m");
  PartitionPlan plan;
  std::size_t start = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t size = m / k + (j < m % k ? 1 : 0);
    std::vector<std::size_t> rows(size);
    std::iota(rows.begin(), rows.end(), start);
    plan.batches.push_back(std::move(rows));
    start += size;
  }
  return plan;
}

PartitionPlan PartitionPlan::random(std::size_t m, std::size_t k, Rng& rng) {
  PartitionPlan plan = contiguous(m, k);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (auto& b : plan.batches) {
    for (auto& i : b) i = order[i];
    std::sort(b.begin(), b.end());
  }
  return plan;
}

AppReport wls_solve(const WLSInstance& inst, const AppConfig& cfg, Rng& rng) {
  validate(cfg);
  validate(inst);
  return run_weighted(inst, PartitionPlan::contiguous(inst.m(), 1), Schedule::fast, cfg, rng);
}

AppReport sgd_solve(const WLSInstance& inst, const PartitionPlan& plan, const AppConfig& cfg, Rng& rng) {
  validate(cfg);
  validate(inst);
  plan.validate(inst.m());
  if (plan.k() == 1) return wls_solve(inst, cfg, rng);
  return run_weighted(inst, plan, Schedule::sequential, cfg, rng);
}

}  // namespace qgd
