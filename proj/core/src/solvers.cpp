#include "qgd/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qgd {

namespace {

constexpr double kZeroNorm = 1e-12;

void check_kappa(double kappa, double epsilon1) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be >= 1");
  if (!(epsilon1 > 0.0) || !std::isfinite(epsilon1)) throw InvalidArgument("epsilon1 must be positive");
}

// Shared body of multiply and solve: conditional rotation by f(lambda_bar)
// into a flag qubit, then post-selection on flag 0.
SolveReport rotate(const WalkOperator& walk, const Vector& x, double epsilon1, double kappa, bool invert,
                   const SveConfig& base, Rng& rng) {
  if (walk.m() != walk.n()) throw InvalidArgument("multiply/solve need a square matrix");
  if (!x.allFinite() || !(x.norm() > 0.0)) throw InvalidArgument("input vector must be nonzero");
  SveConfig cfg = base;
  cfg.delta = epsilon1;
  const SveOutcome sv = sve(walk, x, cfg, rng);
  const double lmin = 1.0 / kappa;
  const auto n = static_cast<Eigen::Index>(walk.n());
  const Vector xu = x / x.norm();

  CVector amps = CVector::Zero(2 * n);  // layout: vector (n) x flag (2)
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = sv.components[static_cast<std::size_t>(i)];
    const double lam = std::clamp(c.estimate, lmin, 1.0);
    const double f = invert ? lmin / lam : lam;
    const double g = std::sqrt(std::max(0.0, 1.0 - f * f));
    const double beta = c.beta / x.norm();
    for (Eigen::Index r = 0; r < n; ++r) {
      amps(2 * r) += beta * f * sv.left(r, i);
      amps(2 * r + 1) += beta * g * sv.right(r, i);
    }
  }
  const PureState state = PureState::normalized({{"vector", static_cast<std::size_t>(n)}, {"flag", 2}}, amps);
  const Amplified amp = amplitude_amplify(state, {{"flag", 0}});

  SolveReport rep;
  rep.z = amp.state.amplitudes().real();
  const Matrix& a = walk.matrix();
  if (invert) {
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    if (qr.rank() < a.cols()) throw NumericalError("solve: matrix is singular");
    rep.reference = qr.solve(xu);
  } else {
    rep.reference = a * xu;
  }
  if (!(rep.reference.norm() > 0.0)) throw NumericalError("reference vector is zero");
  rep.reference.normalize();
  rep.distance = (rep.z - rep.reference).norm();
  rep.epsilon1 = epsilon1;
  rep.kappa = kappa;
  rep.bound = invert ? 2.0 * std::numbers::sqrt2 * kappa * epsilon1 : std::numbers::sqrt2 * epsilon1 * kappa;
  rep.bound_formula = invert ? "2*sqrt(2)*kappa*epsilon1" : "sqrt(2)*epsilon1*kappa";
  rep.success_probability = amp.amplitude * amp.amplitude;
  rep.expected_repetitions = amp.expected_repetitions;
  rep.certified = kappa * epsilon1 <= 0.5;
  rep.sve_failures = sv.failures();
  rep.all_success = rep.sve_failures == 0;
  rep.ancilla_bits = sv.ancilla_bits;
  rep.mu = walk.mu();
  return rep;
}

}  // namespace

SolveReport multiply(const WalkOperator& walk, const Vector& x, double epsilon1, double kappa, const SveConfig& base,
                     Rng& rng) {
  check_kappa(kappa, epsilon1);
  return rotate(walk, x, epsilon1, kappa, false, base, rng);
}

SolveReport solve(const WalkOperator& walk, const Vector& b, double epsilon1, double kappa, const SveConfig& base,
                  Rng& rng) {
  check_kappa(kappa, epsilon1);
  if (kappa * epsilon1 > 0.5) throw InvalidArgument("solve: kappa * epsilon1 must be at most 1/2");
  return rotate(walk, b, epsilon1, kappa, true, base, rng);
}

ApplyResult apply_via_sve(const WalkOperator& walk, const Vector& x, double precision, const SveConfig& base, Rng& rng) {
  SveConfig cfg = base;
  cfg.delta = precision;
  ApplyResult out{Vector::Zero(static_cast<Eigen::Index>(walk.m())), sve(walk, x, cfg, rng)};
  for (std::size_t i = 0; i < out.outcome.components.size(); ++i) {
    const auto& c = out.outcome.components[i];
    out.value += c.beta * c.estimate * out.outcome.left.col(static_cast<Eigen::Index>(i));
  }
  return out;
}

WalkOperator affine_walk(const Matrix& a, const Vector& b, double p) {
  return build_walk(StorePair::from_matrix(affine_block(a, b), p));
}

AffineResult affine_apply(const WalkOperator& affine, const Vector& x, double alpha, double epsilon,
                          const SveConfig& base, Rng& rng) {
  if (affine.n() != static_cast<std::size_t>(x.size()) + 1) throw InvalidArgument("affine_apply: x has the wrong dimension");
  if (!(epsilon > 0.0)) throw InvalidArgument("affine_apply: epsilon must be positive");
  Vector x1(x.size() + 1);
  x1.head(x.size()) = alpha * x;
  x1(x.size()) = 1.0;
  AffineResult out;
  out.precision = epsilon / x1.norm();
  const ApplyResult r = apply_via_sve(affine, x1, out.precision, base, rng);
  const auto m = static_cast<Eigen::Index>(affine.m()) - 1;
  out.value = r.value.head(m);
  out.reference = (affine.matrix() * x1).head(m);
  out.norm = out.value.norm();
  out.error = (out.value - out.reference).norm();
  out.zero_norm = out.norm <= kZeroNorm;
  out.all_success = r.outcome.all_success();
  return out;
}

SpectralNormResult spectral_norm_estimate(const Matrix& a, double epsilon, double delta_rel, const SveConfig& base,
                                          Rng& rng) {
  validate_matrix(a);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("spectral_norm_estimate: epsilon must lie in (0, 1)");
  if (!(delta_rel > 0.0 && delta_rel < 1.0)) throw InvalidArgument("spectral_norm_estimate: delta_rel must lie in (0, 1)");
  const double fro = a.norm();
  if (!(fro > 0.0)) throw InvalidArgument("spectral_norm_estimate: zero matrix");
  const WalkOperator walk = build_walk(build_factors_frobenius(a));
  const SpectralData sd = svd(a);
  const std::vector<double> sigmas(sd.singular_values.data(), sd.singular_values.data() + sd.singular_values.size());

  SpectralNormResult out;
  out.eta = sd.singular_values(0) / fro;
  out.epsilon = epsilon;
  out.delta_rel = delta_rel;
  SveConfig cfg = base;
  cfg.delta = 0.5 * epsilon * fro;
  const int rounds = static_cast<int>(std::ceil(std::log2(1.0 / epsilon)));
  double l = 0.0, u = 1.0;
  for (int r = 0; r < rounds; ++r) {
    const double tau = 0.5 * (l + u);
    const auto est = estimate_singular_values(walk, sd.right, sigmas, cfg, rng);
    ++out.sve_calls;
    double mass = 0.0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      if (std::abs(est[i] - sigmas[i]) > cfg.delta) out.all_success = false;
      if (est[i] / fro >= tau) mass += (sigmas[i] / fro) * (sigmas[i] / fro);
    }
    const AmplitudeEstimate ae = amplitude_estimate(std::min(mass, 1.0), delta_rel, rng, base.reps);
    out.trace.push_back({l, u, tau, mass, ae.estimate});
    if (ae.estimate > 0.0) {
      l = tau;
    } else {
      u = tau;
    }
  }
  out.estimate = 0.5 * (l + u);
  return out;
}

NormalizedMatrix normalize_matrix(const Matrix& a, double epsilon, const SveConfig& base, Rng& rng) {
  validate_matrix(a);
  if (!(a.norm() > 0.0)) throw InvalidArgument("normalize_matrix: zero matrix cannot be normalized");
  const SpectralNormResult r = spectral_norm_estimate(a, epsilon, 0.1, base, rng);
  NormalizedMatrix out;
  out.eta_estimate = r.estimate;
  out.scale = 1.0 / ((r.estimate + epsilon) * a.norm());
  out.scaled = out.scale * a;
  out.spectral_norm = svd(out.scaled).singular_values(0);
  out.certified = out.spectral_norm <= 1.0 + 1e-12;
  return out;
}

}  // namespace qgd
