#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qgd/state.hpp"

using namespace qgd;

namespace {

double mass_within(const std::vector<double>& dist, int t, double center, double width) {
  double total = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    if (std::abs(wrap_angle(outcome_angle(k, t) - center)) <= width) total += dist[k];
  }
  return total;
}

}  // namespace

TEST_CASE("phase estimation concentrates near the eigenphase") {
  const double half_pi = std::numbers::pi / 2;
  const int t = ancilla_bits(0.1);
  CHECK(t == 8);
  CHECK(mass_within(phase_distribution(half_pi, t), t, half_pi, 0.1) >= 0.9);

  // The explicit circuit on diag(1, i) with |v2> gives the same distribution.
  CMatrix u = CMatrix::Zero(2, 2);
  u(0, 0) = 1.0;
  u(1, 1) = Complex(0.0, 1.0);
  const std::vector<std::size_t> v2{1};
  const PureState in = PureState::basis({{"v", 2}}, v2);
  const PureState out = phase_estimation(u, in, "v", t);
  const auto circuit = out.marginal("angle");
  const auto exact = phase_distribution(half_pi, t);
  double tv = 0.0;
  for (std::size_t k = 0; k < exact.size(); ++k) tv += std::abs(circuit[k] - exact[k]);
  CHECK(tv / 2 <= 1e-10);

  Rng rng(0);
  int hits = 0;
  for (int s = 0; s < 200; ++s) {
    if (std::abs(wrap_angle(outcome_angle(sample_phase_outcome(half_pi, t, rng), t) - half_pi)) <= 0.1) ++hits;
  }
  CHECK(hits >= 180);
}

TEST_CASE("grid phases are exact") {
  const int t = 6;
  const auto dist = phase_distribution(outcome_angle(5, t), t);
  CHECK(dist[5] == doctest::Approx(1.0));
  const auto zero = phase_distribution(0.0, t);
  CHECK(zero[0] == doctest::Approx(1.0));
  Rng rng(1);
  CHECK(estimate_folded_phase(0.0, t, 5, rng) == 0.0);
}

TEST_CASE("ancilla limits") {
  CHECK_THROWS_AS(ancilla_bits(0.0), InvalidArgument);
  CHECK_THROWS_AS(ancilla_bits(1e-13), CapacityError);
}

TEST_CASE("amplitude estimation") {
  Rng rng(2);
  CHECK(amplitude_estimate(1.0, 0.1, rng).estimate == doctest::Approx(1.0));
  const AmplitudeEstimate q = amplitude_estimate(0.25, 0.1, rng);
  CHECK(q.estimate >= 0.225);
  CHECK(q.estimate <= 0.275);
  const AmplitudeEstimate z = amplitude_estimate(0.0, 0.1, rng);
  CHECK(z.estimate == 0.0);
  CHECK(z.zero_amplitude);
}

TEST_CASE("amplitude estimation from a circuit matches the sampled model") {
  // Prep rotates |0> to sqrt(0.75)|0> + 0.5|1>; |1> is the good state.
  CMatrix prep(2, 2);
  prep << std::sqrt(0.75), -0.5, 0.5, std::sqrt(0.75);
  Rng rng(3);
  const AmplitudeEstimate e = amplitude_estimate_circuit(prep, {false, true}, 7, rng);
  CHECK(e.estimate == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("amplitude amplification") {
  CVector amps = CVector::Zero(4);
  amps(0) = 1.0;
  const Amplified one = amplitude_amplify(PureState({{"x", 2}, {"flag", 2}}, amps), {{"flag", 0}});
  CHECK(one.expected_repetitions == doctest::Approx(1.0));

  // 0.6|x,0> + 0.8|G,1> with x = |0>, G = |1>.
  amps = CVector::Zero(4);
  amps(0) = 0.6;
  amps(3) = 0.8;
  const Amplified a = amplitude_amplify(PureState({{"x", 2}, {"flag", 2}}, amps), {{"flag", 0}});
  CHECK(a.amplitude == doctest::Approx(0.6));
  CHECK(a.expected_repetitions == doctest::Approx(1.0 / 0.6));
  CHECK(std::abs(a.state.amplitudes()(0)) == doctest::Approx(1.0));

  // Success amplitude 1/kappa with kappa = 4.
  amps = CVector::Zero(4);
  amps(0) = 0.25;
  amps(3) = std::sqrt(1.0 - 0.0625);
  const Amplified k = amplitude_amplify(PureState({{"x", 2}, {"flag", 2}}, amps), {{"flag", 0}});
  CHECK(k.expected_repetitions >= 2.0);
  CHECK(k.expected_repetitions <= 8.0);

  amps = CVector::Zero(4);
  amps(3) = 1.0;
  CHECK_THROWS_AS(amplitude_amplify(PureState({{"x", 2}, {"flag", 2}}, amps), {{"flag", 0}}), NumericalError);
}

TEST_CASE("register algebra") {
  const std::vector<std::size_t> vals{1, 2};
  const PureState s = PureState::basis({{"a", 2}, {"b", 3}}, vals);
  CHECK(s.flat_index(vals) == 5);
  CHECK(s.unflatten(5) == vals);
  CHECK(s.probability({{"b", 2}}) == doctest::Approx(1.0));
  const PureState h = s.with_register("c", 4).walsh_hadamard("c");
  CHECK(h.marginal("c")[3] == doctest::Approx(0.25));
  CHECK(h.norm() == doctest::Approx(1.0));
}
