#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fqt::qsim {

using Complex = std::complex<double>;

/// Row-major 2x2 complex matrix: {m00, m01, m10, m11}.
using Mat2 = std::array<Complex, 4>;

/// Euler angles of a U3 rotation, in radians.
struct GateParams {
  double mu = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
};

/// Pure state of an N-qubit register.
///
/// Basis index i encodes qubit q in bit q, so qubit 0 is the
/// least-significant bit of the index.
class Statevector {
 public:
  /// |0...0> on `n_qubits` qubits.
  explicit Statevector(int n_qubits);

  /// Takes ownership of explicit amplitudes. The length must be a power of
  /// two; the vector is not renormalized.
  static Statevector from_amplitudes(std::vector<Complex> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }

  std::span<const Complex> amplitudes() const { return amplitudes_; }
  std::span<Complex> amplitudes() { return amplitudes_; }

  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }
  Complex& operator[](std::size_t i) { return amplitudes_[i]; }

  double norm() const;

 private:
  Statevector(int n_qubits, std::vector<Complex> amplitudes);

  int n_qubits_;
  std::vector<Complex> amplitudes_;
};

/// U3(mu, phi, lambda) =
///   [[cos(mu/2),            -e^{i lambda} sin(mu/2)],
///    [e^{i phi} sin(mu/2),   e^{i(phi+lambda)} cos(mu/2)]]
/// Throws InvalidParameterError on non-finite angles.
Mat2 u3_matrix(const GateParams& p);

/// Partial derivatives of u3_matrix with respect to mu, phi and lambda.
std::array<Mat2, 3> u3_derivatives(const GateParams& p);

/// Applies an arbitrary 2x2 matrix to one qubit.
void apply_single(Statevector& state, int qubit, const Mat2& u);

/// Applies `u` to `target` on the subspace where `control` is |1>.
void apply_controlled(Statevector& state, int control, int target, const Mat2& u);

void apply_u3(Statevector& state, int qubit, const GateParams& p);
void apply_cu3(Statevector& state, int control, int target, const GateParams& p);

/// |amplitude_i|^2 for every basis index.
std::vector<double> probabilities(const Statevector& state);

/// Empirical basis frequencies from `shots` multinomial draws of the exact
/// distribution, as count / shots. Deterministic for a given seed.
std::vector<double> sample_probabilities(const Statevector& state, std::int64_t shots,
                                         std::uint64_t seed);

}  // namespace fqt::qsim
