#include "fqt/qsim/ansatz.hpp"

#include <string>

#include "fqt/errors.hpp"

namespace fqt::qsim {

namespace {

struct GateSlot {
  int control;  // -1 for a plain U3
  int target;
  std::size_t offset;  // index of mu in theta
};

std::vector<GateSlot> gate_schedule(const AnsatzSpec& spec) {
  std::vector<GateSlot> gates;
  gates.reserve(static_cast<std::size_t>(spec.n_layers) * (2 * spec.n_qubits - 1));
  std::size_t offset = 0;
  for (int layer = 0; layer < spec.n_layers; ++layer) {
    for (int q = 0; q < spec.n_qubits; ++q, offset += 3) gates.push_back({-1, q, offset});
    for (int q = 0; q + 1 < spec.n_qubits; ++q, offset += 3) gates.push_back({q, q + 1, offset});
  }
  return gates;
}

GateParams params_at(std::span<const double> theta, std::size_t offset) {
  return {theta[offset], theta[offset + 1], theta[offset + 2]};
}

Mat2 dagger(const Mat2& u) {
  return {std::conj(u[0]), std::conj(u[2]), std::conj(u[1]), std::conj(u[3])};
}

void apply_gate(Statevector& state, const GateSlot& g, const Mat2& u) {
  if (g.control < 0) {
    apply_single(state, g.target, u);
  } else {
    apply_controlled(state, g.control, g.target, u);
  }
}

// <bra| (D acting on gate slot g) |ket>, where D is a derivative matrix. For
// a controlled gate the derivative vanishes on the control-0 subspace.
Complex derivative_overlap(const Statevector& bra, const Statevector& ket, const GateSlot& g,
                           const Mat2& d) {
  const auto b = bra.amplitudes();
  const auto k = ket.amplitudes();
  const std::size_t tmask = std::size_t{1} << g.target;
  const std::size_t cmask = g.control < 0 ? 0 : std::size_t{1} << g.control;
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < k.size(); ++i) {
    if ((i & tmask) != 0 || (i & cmask) != cmask) continue;
    const std::size_t j = i | tmask;
    acc += std::conj(b[i]) * (d[0] * k[i] + d[1] * k[j]);
    acc += std::conj(b[j]) * (d[2] * k[i] + d[3] * k[j]);
  }
  return acc;
}

void check_theta(const AnsatzSpec& spec, std::span<const double> theta) {
  spec.validate();
  if (theta.size() != spec.param_count()) {
    throw ShapeError("theta has " + std::to_string(theta.size()) + " entries, ansatz (N=" +
                     std::to_string(spec.n_qubits) + ", L=" + std::to_string(spec.n_layers) +
                     ") needs " + std::to_string(spec.param_count()));
  }
}

}  // namespace

void AnsatzSpec::validate() const {
  if (n_qubits < 1 || n_layers < 1) {
    throw InvalidArgumentError("ansatz needs N >= 1 and L >= 1, got N=" +
                               std::to_string(n_qubits) + ", L=" + std::to_string(n_layers));
  }
}

Statevector run_ansatz(const AnsatzSpec& spec, std::span<const double> theta) {
  check_theta(spec, theta);
  Statevector state(spec.n_qubits);
  for (const auto& g : gate_schedule(spec)) {
    apply_gate(state, g, u3_matrix(params_at(theta, g.offset)));
  }
  return state;
}

std::vector<double> grad_ansatz(const AnsatzSpec& spec, std::span<const double> theta,
                                std::span<const double> dL_dp, const Statevector* final_state) {
  check_theta(spec, theta);
  const std::size_t dim = std::size_t{1} << spec.n_qubits;
  if (dL_dp.size() != dim) {
    throw ShapeError("dL_dp has " + std::to_string(dL_dp.size()) + " entries, expected " +
                     std::to_string(dim));
  }

  if (final_state && final_state->n_qubits() != spec.n_qubits) {
    throw ShapeError("cached state does not match the ansatz width");
  }
  Statevector psi = final_state ? *final_state : run_ansatz(spec, theta);
  Statevector lambda = psi;
  for (std::size_t i = 0; i < dim; ++i) lambda[i] *= dL_dp[i];

  std::vector<double> grad(theta.size(), 0.0);
  const auto gates = gate_schedule(spec);
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    const GateParams p = params_at(theta, it->offset);
    const Mat2 u_dag = dagger(u3_matrix(p));
    apply_gate(psi, *it, u_dag);
    const auto derivs = u3_derivatives(p);
    for (std::size_t k = 0; k < 3; ++k) {
      grad[it->offset + k] = 2.0 * derivative_overlap(lambda, psi, *it, derivs[k]).real();
    }
    apply_gate(lambda, *it, u_dag);
  }
  return grad;
}

}  // namespace fqt::qsim
