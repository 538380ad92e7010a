#include "fqt/qsim/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "fqt/errors.hpp"

namespace fqt::qsim {

namespace {

constexpr int kMaxQubits = 30;

void check_qubit(const Statevector& state, int qubit) {
  if (qubit < 0 || qubit >= state.n_qubits()) {
    throw IndexError("qubit " + std::to_string(qubit) + " out of range for " +
                     std::to_string(state.n_qubits()) + "-qubit state");
  }
}

}  // namespace

Statevector::Statevector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw InvalidArgumentError("statevector needs 1.." + std::to_string(kMaxQubits) +
                               " qubits, got " + std::to_string(n_qubits));
  }
  amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  amplitudes_[0] = 1.0;
}

Statevector::Statevector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {}

Statevector Statevector::from_amplitudes(std::vector<Complex> amplitudes) {
  const std::size_t dim = amplitudes.size();
  if (dim < 2 || !std::has_single_bit(dim)) {
    throw ShapeError("amplitude count " + std::to_string(dim) + " is not a power of two >= 2");
  }
  const int n = std::countr_zero(dim);
  if (n > kMaxQubits) {
    throw InvalidArgumentError("too many qubits");
  }
  return Statevector(n, std::move(amplitudes));
}

double Statevector::norm() const {
  double acc = 0.0;
  for (const auto& a : amplitudes_) acc += std::norm(a);
  return std::sqrt(acc);
}

Mat2 u3_matrix(const GateParams& p) {
  if (!std::isfinite(p.mu) || !std::isfinite(p.phi) || !std::isfinite(p.lambda)) {
    throw InvalidParameterError("U3 angles must be finite");
  }
  const double c = std::cos(p.mu / 2.0);
  const double s = std::sin(p.mu / 2.0);
  const Complex e_phi = std::polar(1.0, p.phi);
  const Complex e_lam = std::polar(1.0, p.lambda);
  const Complex e_both = std::polar(1.0, p.phi + p.lambda);
  return {Complex{c, 0.0}, -e_lam * s, e_phi * s, e_both * c};
}

std::array<Mat2, 3> u3_derivatives(const GateParams& p) {
  if (!std::isfinite(p.mu) || !std::isfinite(p.phi) || !std::isfinite(p.lambda)) {
    throw InvalidParameterError("U3 angles must be finite");
  }
  const double c = std::cos(p.mu / 2.0);
  const double s = std::sin(p.mu / 2.0);
  const Complex i{0.0, 1.0};
  const Complex e_phi = std::polar(1.0, p.phi);
  const Complex e_lam = std::polar(1.0, p.lambda);
  const Complex e_both = std::polar(1.0, p.phi + p.lambda);
  const Complex zero{0.0, 0.0};
  return {{
      {Complex{-s / 2.0, 0.0}, -e_lam * (c / 2.0), e_phi * (c / 2.0), -e_both * (s / 2.0)},
      {zero, zero, i * e_phi * s, i * e_both * c},
      {zero, -i * e_lam * s, zero, i * e_both * c},
  }};
}

void apply_single(Statevector& state, int qubit, const Mat2& u) {
  check_qubit(state, qubit);
  auto amps = state.amplitudes();
  const std::size_t stride = std::size_t{1} << qubit;
  for (std::size_t base = 0; base < amps.size(); base += 2 * stride) {
    for (std::size_t k = base; k < base + stride; ++k) {
      const Complex a0 = amps[k];
      const Complex a1 = amps[k + stride];
      amps[k] = u[0] * a0 + u[1] * a1;
      amps[k + stride] = u[2] * a0 + u[3] * a1;
    }
  }
}

void apply_controlled(Statevector& state, int control, int target, const Mat2& u) {
  check_qubit(state, control);
  check_qubit(state, target);
  if (control == target) {
    throw InvalidArgumentError("control and target must differ (both " +
                               std::to_string(control) + ")");
  }
  auto amps = state.amplitudes();
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    if ((k & cmask) == 0 || (k & tmask) != 0) continue;
    const Complex a0 = amps[k];
    const Complex a1 = amps[k | tmask];
    amps[k] = u[0] * a0 + u[1] * a1;
    amps[k | tmask] = u[2] * a0 + u[3] * a1;
  }
}

void apply_u3(Statevector& state, int qubit, const GateParams& p) {
  apply_single(state, qubit, u3_matrix(p));
}

void apply_cu3(Statevector& state, int control, int target, const GateParams& p) {
  apply_controlled(state, control, target, u3_matrix(p));
}

std::vector<double> probabilities(const Statevector& state) {
  std::vector<double> out(state.dim());
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(amps[i]);
  return out;
}

std::vector<double> sample_probabilities(const Statevector& state, std::int64_t shots,
                                         std::uint64_t seed) {
  if (shots < 1) {
    throw InvalidArgumentError("shots must be >= 1, got " + std::to_string(shots));
  }
  const std::vector<double> exact = probabilities(state);
  std::mt19937_64 rng(seed);

  // Multinomial draw as a chain of conditional binomials.
  std::vector<double> freq(exact.size(), 0.0);
  std::int64_t remaining = shots;
  double mass_left = 1.0;
  for (std::size_t i = 0; i < exact.size() && remaining > 0; ++i) {
    std::int64_t count = 0;
    if (i + 1 == exact.size() || mass_left <= exact[i]) {
      count = remaining;
    } else if (exact[i] > 0.0) {
      const double p = std::clamp(exact[i] / mass_left, 0.0, 1.0);
      std::binomial_distribution<std::int64_t> draw(remaining, p);
      count = draw(rng);
    }
    freq[i] = static_cast<double>(count) / static_cast<double>(shots);
    remaining -= count;
    mass_left -= exact[i];
  }
  return freq;
}

}  // namespace fqt::qsim
