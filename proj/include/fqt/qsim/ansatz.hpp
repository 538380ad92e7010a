#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fqt/qsim/statevector.hpp"

namespace fqt::qsim {

/// Shape of the layered U3/CU3 ansatz.
///
/// Each layer applies U3 to every qubit 0..N-1, then a chain of CU3 gates
/// with control i and target i+1 for i = 0..N-2. Theta is laid out layer by
/// layer; inside a layer the N U3 triples come first, then the N-1 CU3
/// triples, each ordered (mu, phi, lambda).
struct AnsatzSpec {
  int n_qubits = 1;
  int n_layers = 1;

  std::size_t params_per_layer() const { return 3 * static_cast<std::size_t>(2 * n_qubits - 1); }
  std::size_t param_count() const { return static_cast<std::size_t>(n_layers) * params_per_layer(); }

  /// Throws InvalidArgumentError unless N >= 1 and L >= 1.
  void validate() const;
};

/// Runs the ansatz from |0...0>. Throws ShapeError on a theta length mismatch.
Statevector run_ansatz(const AnsatzSpec& spec, std::span<const double> theta);

/// Gradient of sum_i dL_dp[i] * p_i(theta) with respect to theta.
///
/// Uses an adjoint sweep: one forward pass, then gates are un-applied in
/// reverse while the cotangent state is propagated alongside, so each
/// parameter costs one inner product with the analytic derivative matrix.
///
/// `final_state`, when given, must be run_ansatz(spec, theta); it saves the
/// forward pass.
std::vector<double> grad_ansatz(const AnsatzSpec& spec, std::span<const double> theta,
                                std::span<const double> dL_dp,
                                const Statevector* final_state = nullptr);

}  // namespace fqt::qsim
