#pragma once

// Statevector simulation over named registers, plus the two subroutines the
// algorithms use as black boxes: phase estimation and amplitude
// amplification / estimation.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qgd/types.hpp"

namespace qgd {

/// Explicit simulations refuse to allocate more amplitudes than this.
inline constexpr std::size_t kSimulationCap = std::size_t{1} << 20;

/// Largest phase-estimation register, in qubits. Sampled registers never
/// allocate 2^t entries; the limit keeps the grid position phase * 2^t / 2 pi
/// resolved to about 2^-13 of a grid step in double precision.
inline constexpr int kMaxAncillaBits = 40;

/// Default number of independent angle registers whose median is reported.
inline constexpr int kDefaultReps = 15;

struct Register {
  std::string name;
  std::size_t dim = 1;
};

/// A list of (register, value) pairs that must all match.
using Selector = std::vector<std::pair<std::string, std::size_t>>;

/// Pure state over a product of registers. The first register is the most
/// significant digit of the flat index.
class PureState {
 public:
  PureState(std::vector<Register> layout, CVector amplitudes);

  static PureState basis(std::vector<Register> layout, std::span<const std::size_t> values);
  /// Normalizes `amplitudes` first; throws on a zero vector.
  static PureState normalized(std::vector<Register> layout, CVector amplitudes);

  const std::vector<Register>& layout() const { return layout_; }
  const CVector& amplitudes() const { return amps_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  double norm() const { return amps_.norm(); }

  std::size_t register_index(const std::string& name) const;
  std::size_t flat_index(std::span<const std::size_t> values) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  /// Outcome probabilities for measuring one register.
  std::vector<double> marginal(const std::string& name) const;
  /// Probability that every selector entry matches.
  double probability(const Selector& sel) const;

  /// Appends a register initialized to |0>.
  PureState with_register(const std::string& name, std::size_t dim) const;
  /// Applies `u` to one register.
  PureState apply(const std::string& name, const CMatrix& u) const;
  /// H^{(x)l} on a register of dimension 2^l.
  PureState walsh_hadamard(const std::string& name) const;

  /// Collapses a register on `outcome` and renormalizes.
  PureState collapse(const std::string& name, std::size_t outcome) const;

  /// {"layout": [...], "amplitudes": {"label": [re, im]}} for nonzero entries.
  std::string to_json() const;

 private:
  // Strides for iterating a single register: outer blocks, dim, inner size.
  struct Slicing {
    std::size_t outer, dim, inner;
  };
  Slicing slicing(std::size_t reg) const;

  std::vector<Register> layout_;
  CVector amps_;
};

struct Measurement {
  std::size_t outcome = 0;
  double probability = 0.0;
  PureState state;
};

Measurement measure(const PureState& s, const std::string& name, Rng& rng);

// ---------------------------------------------------------------------------
// Phase estimation

/// ceil(log2(2 pi / epsilon)) + 2. Throws for epsilon outside (0, pi) and
/// CapacityError above kMaxAncillaBits.
int ancilla_bits(double epsilon);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

/// Angle 2 pi k / 2^t, wrapped.
double outcome_angle(std::size_t k, int t);

/// Probability of outcome k when estimating eigenphase `phase` with N = 2^t:
/// sin^2(N d / 2) / (N^2 sin^2(d / 2)) with d = phase - 2 pi k / N.
double fejer_probability(double phase, std::size_t k, int t);

/// Full outcome distribution (length 2^t). Intended for small t.
std::vector<double> phase_distribution(double phase, int t);

/// Draws one outcome from the exact single-register distribution.
std::size_t sample_phase_outcome(double phase, int t, Rng& rng);

/// Median over `reps` independent registers of the folded angle |theta_bar|.
/// The result lies in [0, pi].
double estimate_folded_phase(double phase, int t, int reps, Rng& rng);

/// Circuit phase estimation: appends an angle register of 2^t entries and
/// maps |psi>|0> to the inverse QFT of (1/sqrt N) sum_x U^x |psi>|x>, with U
/// acting on register `target`.
PureState phase_estimation(const CMatrix& u, const PureState& phi, const std::string& target, int t,
                           const std::string& angle = "angle", std::size_t cap = kSimulationCap);

/// Runs phase estimation backwards and removes the angle register by
/// projecting it on the uniform superposition the forward pass started from.
/// Throws NumericalError if that projection loses norm, i.e. the angle
/// register was not left as phase_estimation produced it.
PureState inverse_phase_estimation(const CMatrix& u, const PureState& s, const std::string& target,
                                   const std::string& angle = "angle");

// ---------------------------------------------------------------------------
// Amplitude estimation and amplification

struct AmplitudeEstimate {
  double estimate = 0.0;
  bool zero_amplitude = false;
  std::size_t grid = 0;      // M, the number of Grover powers per register
  std::size_t queries = 0;   // calls to the state preparation, all registers
  int reps = 0;
};

/// Grid size M = next power of two above 4 pi / (epsilon sin theta) for a
/// success probability sin^2 theta, which gives relative error epsilon.
std::size_t amplitude_grid(double probability, double epsilon);

/// Simulates amplitude estimation of `probability` from the exact outcome
/// distribution (eigenphases +-2 theta of the Grover operator), reporting the
/// median of `reps` runs of sin^2(pi y / M).
AmplitudeEstimate amplitude_estimate(double probability, double epsilon, Rng& rng, int reps = kDefaultReps);

/// Same estimate from an explicit circuit: `prep` is the state preparation
/// acting on |0>, `good` marks the success basis states, and Q = -A S_0 A^dag
/// S_chi is phase-estimated with t bits.
AmplitudeEstimate amplitude_estimate_circuit(const CMatrix& prep, const std::vector<bool>& good, int t, Rng& rng,
                                             int reps = kDefaultReps);

struct Amplified {
  PureState state;               // normalized success branch, selector registers dropped
  double amplitude = 0.0;        // norm of the success branch before amplification
  double expected_repetitions = 0.0;  // 1 / amplitude
};

/// Exact post-selection on `sel`. Throws NumericalError on a zero branch.
Amplified amplitude_amplify(const PureState& s, const Selector& sel);

}  // namespace qgd
