#include "qgd/state.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "json.hpp"

namespace qgd {

namespace {

constexpr double kNormTolerance = 1e-10;
constexpr double kGridSnap = 1e-9;
constexpr std::size_t kWindow = 64;
constexpr std::size_t kEnumerateBelow = 512;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t product(const std::vector<Register>& layout) {
  std::size_t n = 1;
  for (const auto& r : layout) {
    if (r.dim == 0) throw InvalidArgument("register '" + r.name + "' has dimension 0");
    n *= r.dim;
  }
  return n;
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Position of `phase` on the grid of N outcomes, in [0, N).
double grid_position(double phase, std::size_t n) {
  double pos = std::fmod(phase / kTwoPi, 1.0);
  if (pos < 0.0) pos += 1.0;
  pos *= static_cast<double>(n);
  return pos >= static_cast<double>(n) ? pos - static_cast<double>(n) : pos;
}

// Probability of landing `offset` grid points away from the nearest one, when
// the phase sits `frac` in [-1/2, 1/2] past that grid point.
double offset_probability(double frac, double offset, double n) {
  const double x = frac - offset;
  const double den = std::sin(std::numbers::pi * x / n);
  if (den == 0.0) return 1.0;
  const double num = std::sin(std::numbers::pi * frac);
  return (num * num) / (n * n * den * den);
}

CVector apply_on(const CVector& amps, std::size_t outer, std::size_t dim, std::size_t inner, const CMatrix& u) {
  CVector out(amps.size());
  CVector slice(dim);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * dim * inner + in;
      for (std::size_t d = 0; d < dim; ++d) slice(d) = amps(base + d * inner);
      const CVector r = u * slice;
      for (std::size_t d = 0; d < dim; ++d) out(base + d * inner) = r(d);
    }
  }
  return out;
}

}  // namespace

PureState::PureState(std::vector<Register> layout, CVector amplitudes)
    : layout_(std::move(layout)), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != product(layout_)) {
    throw InvalidArgument("state: amplitude count does not match register layout");
  }
  if (std::abs(amps_.norm() - 1.0) > kNormTolerance) throw NumericalError("state: amplitudes are not unit norm");
}

PureState PureState::basis(std::vector<Register> layout, std::span<const std::size_t> values) {
  if (values.size() != layout.size()) throw InvalidArgument("state: wrong number of register values");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (values[k] >= layout[k].dim) throw InvalidArgument("state: register value out of range");
    flat = flat * layout[k].dim + values[k];
  }
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(product(layout)));
  amps(static_cast<Eigen::Index>(flat)) = 1.0;
  return PureState(std::move(layout), std::move(amps));
}

PureState PureState::normalized(std::vector<Register> layout, CVector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("state: cannot normalize a zero vector");
  return PureState(std::move(layout), amplitudes / n);
}

std::size_t PureState::register_index(const std::string& name) const {
  for (std::size_t k = 0; k < layout_.size(); ++k) {
    if (layout_[k].name == name) return k;
  }
  throw InvalidArgument("state: no register named '" + name + "'");
}

std::size_t PureState::flat_index(std::span<const std::size_t> values) const {
  if (values.size() != layout_.size()) throw InvalidArgument("state: wrong number of register values");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < layout_.size(); ++k) {
    if (values[k] >= layout_[k].dim) throw InvalidArgument("state: register value out of range");
    flat = flat * layout_[k].dim + values[k];
  }
  return flat;
}

std::vector<std::size_t> PureState::unflatten(std::size_t flat) const {
  std::vector<std::size_t> values(layout_.size());
  for (std::size_t k = layout_.size(); k-- > 0;) {
    values[k] = flat % layout_[k].dim;
    flat /= layout_[k].dim;
  }
  return values;
}

PureState::Slicing PureState::slicing(std::size_t reg) const {
  Slicing s{1, layout_[reg].dim, 1};
  for (std::size_t k = 0; k < reg; ++k) s.outer *= layout_[k].dim;
  for (std::size_t k = reg + 1; k < layout_.size(); ++k) s.inner *= layout_[k].dim;
  return s;
}

std::vector<double> PureState::marginal(const std::string& name) const {
  const Slicing s = slicing(register_index(name));
  std::vector<double> p(s.dim, 0.0);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t d = 0; d < s.dim; ++d) {
      for (std::size_t in = 0; in < s.inner; ++in) p[d] += std::norm(amps_((o * s.dim + d) * s.inner + in));
    }
  }
  return p;
}

double PureState::probability(const Selector& sel) const {
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (const auto& [name, v] : sel) idx.emplace_back(register_index(name), v);
  double p = 0.0;
  for (std::size_t f = 0; f < dim(); ++f) {
    const auto values = unflatten(f);
    bool ok = true;
    for (const auto& [k, v] : idx) ok = ok && values[k] == v;
    if (ok) p += std::norm(amps_(f));
  }
  return p;
}

PureState PureState::with_register(const std::string& name, std::size_t dim) const {
  for (const auto& r : layout_) {
    if (r.name == name) throw InvalidArgument("state: register '" + name + "' already exists");
  }
  auto layout = layout_;
  layout.push_back({name, dim});
  CVector amps = CVector::Zero(amps_.size() * static_cast<Eigen::Index>(dim));
  for (Eigen::Index f = 0; f < amps_.size(); ++f) amps(f * static_cast<Eigen::Index>(dim)) = amps_(f);
  return PureState(std::move(layout), std::move(amps));
}

PureState PureState::apply(const std::string& name, const CMatrix& u) const {
  const Slicing s = slicing(register_index(name));
  if (static_cast<std::size_t>(u.rows()) != s.dim || static_cast<std::size_t>(u.cols()) != s.dim) {
    throw InvalidArgument("state: operator dimension does not match register '" + name + "'");
  }
  return PureState(layout_, apply_on(amps_, s.outer, s.dim, s.inner, u));
}

PureState PureState::walsh_hadamard(const std::string& name) const {
  const Slicing s = slicing(register_index(name));
  if (!std::has_single_bit(s.dim)) throw InvalidArgument("walsh_hadamard: register dimension must be a power of two");
  CVector out = amps_;
  // In-place fast transform along the register axis.
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.dim * s.inner + in;
      for (std::size_t len = 1; len < s.dim; len <<= 1) {
        for (std::size_t i = 0; i < s.dim; i += 2 * len) {
          for (std::size_t j = i; j < i + len; ++j) {
            const Complex a = out(base + j * s.inner);
            const Complex b = out(base + (j + len) * s.inner);
            out(base + j * s.inner) = a + b;
            out(base + (j + len) * s.inner) = a - b;
          }
        }
      }
    }
  }
  out /= std::sqrt(static_cast<double>(s.dim));
  return PureState(layout_, std::move(out));
}

PureState PureState::collapse(const std::string& name, std::size_t outcome) const {
  const Slicing s = slicing(register_index(name));
  if (outcome >= s.dim) throw InvalidArgument("collapse: outcome out of range");
  CVector out = CVector::Zero(amps_.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t f = (o * s.dim + outcome) * s.inner + in;
      out(f) = amps_(f);
    }
  }
  return normalized(layout_, std::move(out));
}

std::string PureState::to_json() const {
  nlohmann::json layout = nlohmann::json::array();
  for (const auto& r : layout_) layout.push_back({{"name", r.name}, {"dim", r.dim}});
  nlohmann::json amps = nlohmann::json::object();
  for (std::size_t f = 0; f < dim(); ++f) {
    if (amps_(f) == Complex(0.0, 0.0)) continue;
    std::string label;
    for (std::size_t v : unflatten(f)) label += (label.empty() ? "" : ",") + std::to_string(v);
    amps[label] = {amps_(f).real(), amps_(f).imag()};
  }
  return nlohmann::json{{"layout", layout}, {"amplitudes", amps}}.dump();
}

Measurement measure(const PureState& s, const std::string& name, Rng& rng) {
  const auto p = s.marginal(name);
  std::discrete_distribution<std::size_t> dist(p.begin(), p.end());
  const std::size_t k = dist(rng);
  return {k, p[k], s.collapse(name, k)};
}

int ancilla_bits(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < std::numbers::pi)) throw InvalidArgument("phase estimation precision must lie in (0, pi)");
  const int t = static_cast<int>(std::ceil(std::log2(kTwoPi / epsilon))) + 2;
  if (t > kMaxAncillaBits) {
    throw CapacityError("phase estimation would need " + std::to_string(t) + " ancilla qubits (limit " +
                        std::to_string(kMaxAncillaBits) + ")");
  }
  return t;
}

double wrap_angle(double theta) {
  double w = std::remainder(theta, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

double outcome_angle(std::size_t k, int t) {
  const double n = std::ldexp(1.0, t);
  return wrap_angle(kTwoPi * static_cast<double>(k) / n);
}

double fejer_probability(double phase, std::size_t k, int t) {
  const std::size_t n = std::size_t{1} << t;
  if (k >= n) throw InvalidArgument("fejer_probability: outcome out of range");
  const double pos = grid_position(phase, n);
  const double nearest = std::round(pos);
  const double frac = pos - nearest;
  const auto k0 = static_cast<std::size_t>(nearest) % n;
  // Signed offset of k from the nearest grid point, in (-N/2, N/2].
  auto offset = static_cast<double>((k + n - k0) % n);
  if (offset > static_cast<double>(n) / 2) offset -= static_cast<double>(n);
  if (std::abs(frac) < kGridSnap) return offset == 0.0 ? 1.0 : 0.0;
  return offset_probability(frac, offset, static_cast<double>(n));
}

std::vector<double> phase_distribution(double phase, int t) {
  const std::size_t n = std::size_t{1} << t;
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) p[k] = fejer_probability(phase, k, t);
  return p;
}

std::size_t sample_phase_outcome(double phase, int t, Rng& rng) {
  if (t < 1 || t > kMaxAncillaBits) throw InvalidArgument("sample_phase_outcome: bad register size");
  const std::size_t n = std::size_t{1} << t;
  const double nd = static_cast<double>(n);
  const double pos = grid_position(phase, n);
  const double nearest = std::round(pos);
  const double frac = pos - nearest;
  const auto k0 = static_cast<std::size_t>(nearest) % n;
  if (std::abs(frac) < kGridSnap) return k0;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (n <= kEnumerateBelow) {
    const auto p = phase_distribution(phase, t);
    std::discrete_distribution<std::size_t> dist(p.begin(), p.end());
    return dist(rng);
  }

  auto at_offset = [&](long long d) {
    return static_cast<std::size_t>((static_cast<long long>(k0) + d % static_cast<long long>(n) +
                                     static_cast<long long>(n)) % static_cast<long long>(n));
  };

  // Most of the mass sits within a few grid points; sample that window
  // directly and fall through to an exact rejection sampler for the tail.
  const auto w = static_cast<long long>(kWindow);
  std::vector<double> win;
  double mass = 0.0;
  for (long long d = -w; d <= w; ++d) {
    win.push_back(offset_probability(frac, static_cast<double>(d), nd));
    mass += win.back();
  }
  double u = unif(rng);
  if (u < mass) {
    for (long long d = -w; d <= w; ++d) {
      u -= win[static_cast<std::size_t>(d + w)];
      if (u < 0.0) return at_offset(d);
    }
    return k0;
  }

  // Envelope: P(offset d) <= 1 / (4 (|d| - 1/2)^2), dominated by the integral
  // of (u - 1/2)^-2 over (|d| - 1, |d|]. Draw u from that density on [W, inf).
  const double c = 0.5;
  const double half = nd / 2.0;
  for (int iter = 0; iter < 10'000'000; ++iter) {
    const double v = c + (static_cast<double>(w) - c) / (1.0 - unif(rng));
    const double d = std::ceil(v);
    if (d <= static_cast<double>(w)) continue;
    const bool plus = unif(rng) < 0.5;
    if (d > half || (d == half && !plus)) continue;  // each residue once
    const double off = plus ? d : -d;
    const double env = 1.0 / (d - 1.0 - c) - 1.0 / (d - c);
    const double accept = std::min(1.0, 4.0 * offset_probability(frac, off, nd) / env);
    if (unif(rng) < accept) return at_offset(static_cast<long long>(off));
  }
  throw NumericalError("sample_phase_outcome: tail sampler did not converge");
}

double estimate_folded_phase(double phase, int t, int reps, Rng& rng) {
  if (reps < 1) throw InvalidArgument("reps must be >= 1");
  std::vector<double> draws(static_cast<std::size_t>(reps));
  for (auto& d : draws) d = std::abs(outcome_angle(sample_phase_outcome(phase, t, rng), t));
  return median(std::move(draws));
}

PureState phase_estimation(const CMatrix& u, const PureState& phi, const std::string& target, int t,
                           const std::string& angle, std::size_t cap) {
  if (t < 1 || t > kMaxAncillaBits) throw InvalidArgument("phase_estimation: bad register size");
  const std::size_t n = std::size_t{1} << t;
  if (phi.dim() > cap / n) {
    throw CapacityError("phase estimation on " + std::to_string(phi.dim()) + " x 2^" + std::to_string(t) +
                        " amplitudes exceeds the simulation cap; use the analytic mode");
  }
  const std::size_t reg = phi.register_index(target);
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < reg; ++k) outer *= phi.layout()[k].dim;
  for (std::size_t k = reg + 1; k < phi.layout().size(); ++k) inner *= phi.layout()[k].dim;
  const std::size_t dim = phi.layout()[reg].dim;
  if (static_cast<std::size_t>(u.rows()) != dim || static_cast<std::size_t>(u.cols()) != dim) {
    throw InvalidArgument("phase_estimation: operator dimension does not match target register");
  }

  auto layout = phi.layout();
  layout.push_back({angle, n});
  const std::size_t base = phi.dim();
  std::vector<std::vector<Complex>> blocks(base, std::vector<Complex>(n));
  CVector psi = phi.amplitudes();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t f = 0; f < base; ++f) blocks[f][x] = psi(f) * inv_sqrt_n;
    if (x + 1 < n) psi = apply_on(psi, outer, dim, inner, u);
  }
  Eigen::FFT<double> fft;
  CVector amps(base * n);
  std::vector<Complex> freq;
  for (std::size_t f = 0; f < base; ++f) {
    fft.fwd(freq, blocks[f]);
    for (std::size_t k = 0; k < n; ++k) amps(f * n + k) = freq[k] * inv_sqrt_n;
  }
  return PureState(std::move(layout), std::move(amps));
}

PureState inverse_phase_estimation(const CMatrix& u, const PureState& s, const std::string& target,
                                   const std::string& angle) {
  const auto& layout = s.layout();
  if (layout.empty() || layout.back().name != angle) {
    throw InvalidArgument("inverse_phase_estimation: the angle register must be the last register");
  }
  const std::size_t n = layout.back().dim;
  std::vector<Register> rest(layout.begin(), layout.end() - 1);
  const std::size_t base = s.dim() / n;
  std::size_t reg = rest.size();
  for (std::size_t k = 0; k < rest.size(); ++k) {
    if (rest[k].name == target) reg = k;
  }
  if (reg == rest.size()) throw InvalidArgument("inverse_phase_estimation: no target register '" + target + "'");
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < reg; ++k) outer *= rest[k].dim;
  for (std::size_t k = reg + 1; k < rest.size(); ++k) inner *= rest[k].dim;
  const std::size_t dim = rest[reg].dim;

  // Undo the inverse QFT: Eigen's inverse transform carries 1/N, so scale by
  // sqrt(N) to get the unitary QFT.
  Eigen::FFT<double> fft;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  std::vector<CVector> slices(n, CVector(base));
  std::vector<Complex> block(n), freq;
  for (std::size_t f = 0; f < base; ++f) {
    for (std::size_t k = 0; k < n; ++k) block[k] = s.amplitudes()(f * n + k);
    fft.inv(freq, block);
    for (std::size_t x = 0; x < n; ++x) slices[x](f) = freq[x] * sqrt_n;
  }
  // Undo the controlled powers and project on the uniform superposition:
  // sum_x U^{-x} slice_x / sqrt(N), accumulated Horner style.
  const CMatrix u_dag = u.adjoint();
  CVector acc = slices[n - 1];
  for (std::size_t x = n - 1; x-- > 0;) acc = apply_on(acc, outer, dim, inner, u_dag) + slices[x];
  acc /= sqrt_n;
  if (std::abs(acc.norm() - 1.0) > 1e-8) {
    throw NumericalError("inverse_phase_estimation: the angle register does not uncompute");
  }
  return PureState::normalized(std::move(rest), std::move(acc));
}

std::size_t amplitude_grid(double probability, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("amplitude estimation precision must lie in (0, 1)");
  if (!(probability > 0.0 && probability <= 1.0)) throw InvalidArgument("amplitude_grid: probability must lie in (0, 1]");
  const double need = std::ceil(4.0 * std::numbers::pi / (epsilon * std::sqrt(probability)));
  if (need > std::ldexp(1.0, kMaxAncillaBits)) throw CapacityError("amplitude estimation grid too large");
  return std::bit_ceil(static_cast<std::size_t>(need));
}

AmplitudeEstimate amplitude_estimate(double probability, double epsilon, Rng& rng, int reps) {
  if (!(probability >= 0.0 && probability <= 1.0 + 1e-12)) throw InvalidArgument("amplitude_estimate: probability out of range");
  if (reps < 1) throw InvalidArgument("reps must be >= 1");
  AmplitudeEstimate out;
  out.reps = reps;
  if (probability <= 0.0) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("amplitude estimation precision must lie in (0, 1)");
    out.zero_amplitude = true;
    return out;
  }
  probability = std::min(probability, 1.0);
  out.grid = amplitude_grid(probability, epsilon);
  const int t = std::countr_zero(out.grid);
  const double theta = std::asin(std::sqrt(probability));
  std::vector<double> draws(static_cast<std::size_t>(reps));
  for (auto& d : draws) {
    const std::size_t y = sample_phase_outcome(2.0 * theta, t, rng);
    const double s = std::sin(std::numbers::pi * static_cast<double>(y) / static_cast<double>(out.grid));
    d = s * s;
  }
  out.estimate = median(std::move(draws));
  out.queries = out.grid * static_cast<std::size_t>(reps);
  return out;
}

AmplitudeEstimate amplitude_estimate_circuit(const CMatrix& prep, const std::vector<bool>& good, int t, Rng& rng,
                                             int reps) {
  const auto d = prep.rows();
  if (prep.cols() != d || static_cast<std::size_t>(d) != good.size()) {
    throw InvalidArgument("amplitude_estimate_circuit: dimension mismatch");
  }
  CMatrix s_chi = CMatrix::Identity(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (good[static_cast<std::size_t>(i)]) s_chi(i, i) = -1.0;
  }
  CMatrix s_zero = CMatrix::Identity(d, d);
  s_zero(0, 0) = -1.0;
  const CMatrix q = -prep * s_zero * prep.adjoint() * s_chi;

  const std::vector<Register> layout{{"system", static_cast<std::size_t>(d)}};
  const PureState start(layout, prep.col(0));
  const PureState pe = phase_estimation(q, start, "system", t);
  const auto p = pe.marginal("angle");
  std::discrete_distribution<std::size_t> dist(p.begin(), p.end());
  const std::size_t n = std::size_t{1} << t;
  std::vector<double> draws(static_cast<std::size_t>(reps));
  for (auto& v : draws) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(dist(rng)) / static_cast<double>(n));
    v = s * s;
  }
  AmplitudeEstimate out;
  out.estimate = median(std::move(draws));
  out.grid = n;
  out.queries = n * static_cast<std::size_t>(reps);
  out.reps = reps;
  out.zero_amplitude = out.estimate == 0.0;
  return out;
}

Amplified amplitude_amplify(const PureState& s, const Selector& sel) {
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  std::vector<bool> selected(s.layout().size(), false);
  for (const auto& [name, v] : sel) {
    const std::size_t k = s.register_index(name);
    if (v >= s.layout()[k].dim) throw InvalidArgument("amplitude_amplify: selector value out of range");
    idx.emplace_back(k, v);
    selected[k] = true;
  }
  std::vector<Register> kept;
  for (std::size_t k = 0; k < s.layout().size(); ++k) {
    if (!selected[k]) kept.push_back(s.layout()[k]);
  }
  if (kept.empty()) throw InvalidArgument("amplitude_amplify: selector covers every register");
  CVector out = CVector::Zero(static_cast<Eigen::Index>(product(kept)));
  for (std::size_t f = 0; f < s.dim(); ++f) {
    const auto values = s.unflatten(f);
    bool ok = true;
    for (const auto& [k, v] : idx) ok = ok && values[k] == v;
    if (!ok) continue;
    std::size_t g = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!selected[k]) g = g * s.layout()[k].dim + values[k];
    }
    out(static_cast<Eigen::Index>(g)) = s.amplitudes()(static_cast<Eigen::Index>(f));
  }
  const double amp = out.norm();
  if (!(amp > 0.0)) throw NumericalError("amplitude_amplify: success branch has zero amplitude");
  return {PureState(std::move(kept), out / amp), amp, 1.0 / amp};
}

}  // namespace qgd
