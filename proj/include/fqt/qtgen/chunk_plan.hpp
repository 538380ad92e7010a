#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fqt::qtgen {

/// How m target weights are split into chunks of n_mlp, and how many qubits
/// are needed to give every chunk its own basis state.
///
///   n_ch     = ceil(m / n_mlp)
///   n_qubits = max(1, ceil(log2(n_ch)))
///
/// n_mlp = 1 is the one-weight-per-basis-state layout, needing
/// ceil(log2(m)) qubits.
struct ChunkPlan {
  std::int64_t m = 0;
  std::int64_t n_mlp = 0;
  std::int64_t n_ch = 0;
  int n_qubits = 0;

  std::size_t basis_dim() const { return std::size_t{1} << n_qubits; }
  /// n_ch * n_mlp, the number of values the mapping model produces.
  std::int64_t generated() const { return n_ch * n_mlp; }
};

/// Throws InvalidArgumentError unless m >= 1 and n_mlp >= 1.
ChunkPlan plan_chunks(std::int64_t m, std::int64_t n_mlp);

/// ceil(log2(n)) for n >= 1.
int ceil_log2(std::int64_t n);

/// Mapping-model input for chunk i: the bits of i (LSB first) and the
/// measured probability of basis state i scaled by 2^N.
struct BasisFeature {
  std::vector<double> bits;
  double prob = 0.0;
};

/// Throws IndexError when i is not a chunk index and ShapeError when `probs`
/// is not 2^N long.
BasisFeature basis_features(std::int64_t i, const ChunkPlan& plan, std::span<const double> probs);

}  // namespace fqt::qtgen
