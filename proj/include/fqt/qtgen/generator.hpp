#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fqt/nn/model.hpp"
#include "fqt/qsim/ansatz.hpp"
#include "fqt/qtgen/chunk_plan.hpp"

namespace fqt::qtgen {

/// Fully-connected mapping network: input N+1, tanh hidden layers, linear
/// output of width n_mlp.
nn::ModelSpec mapping_spec(const ChunkPlan& plan, std::span<const std::size_t> hidden);

/// Parameter count of mapping_spec(plan, hidden) without building it.
std::size_t mapping_param_count(int n_qubits, std::span<const std::size_t> hidden,
                                std::int64_t n_mlp);

/// Trainable parameters of one generator.
struct QtParams {
  std::vector<double> theta;
  std::vector<double> beta;

  std::size_t size() const { return theta.size() + beta.size(); }
  /// theta followed by beta.
  std::vector<double> flat() const;
  void assign_flat(std::span<const double> flat);
};

/// Reverse-mode cache of one generation pass.
struct GenerationTape {
  std::uint64_t owner = 0;
  std::uint64_t version = 0;
  qsim::Statevector state{1};
  std::vector<double> probs;
  nn::Tape mapping;
};

struct Generation {
  std::vector<double> omega;
  GenerationTape tape;
};

/// Quantum-circuit weight generator: a layered ansatz whose basis
/// probabilities feed a shared mapping network, each basis state producing
/// one chunk of n_mlp target weights.
class Generator {
 public:
  /// `ansatz.n_qubits` must equal `plan.n_qubits`, and the parameter lengths
  /// must match; otherwise ShapeError.
  Generator(qsim::AnsatzSpec ansatz, ChunkPlan plan, std::vector<std::size_t> hidden,
            QtParams params);

  /// theta ~ U[-pi, pi]; each mapping weight and bias ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static Generator initialize(qsim::AnsatzSpec ansatz, ChunkPlan plan,
                              std::vector<std::size_t> hidden, std::uint64_t seed);

  Generator(const Generator& other);
  Generator& operator=(const Generator& other);
  Generator(Generator&&) noexcept = default;
  Generator& operator=(Generator&&) noexcept = default;

  const qsim::AnsatzSpec& ansatz() const { return ansatz_; }
  const ChunkPlan& plan() const { return plan_; }
  const nn::ModelSpec& mapping() const { return mapping_; }
  const std::vector<std::size_t>& hidden() const { return hidden_; }
  const QtParams& params() const { return params_; }
  std::size_t trainable_count() const { return params_.size(); }

  /// Replaces theta and beta. Any tape taken before becomes stale.
  void set_params(QtParams params);
  void set_flat(std::span<const double> flat);

  /// Runs the ansatz once, evaluates the mapping net on every chunk and
  /// returns the first m generated values.
  Generation generate_params() const;

  /// Chain rule from dL/d(omega) back to (dL/dtheta, dL/dbeta). Throws
  /// InvalidStateError if `tape` came from different parameters.
  QtParams backprop_generation(std::span<const double> dL_domega,
                               const GenerationTape& tape) const;

 private:
  void validate() const;

  qsim::AnsatzSpec ansatz_;
  ChunkPlan plan_;
  std::vector<std::size_t> hidden_;
  nn::ModelSpec mapping_;
  QtParams params_;
  std::uint64_t id_;
  std::uint64_t version_ = 0;
};

}  // namespace fqt::qtgen
