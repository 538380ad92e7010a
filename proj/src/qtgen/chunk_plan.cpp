#include "fqt/qtgen/chunk_plan.hpp"

#include <algorithm>
#include <string>

#include "fqt/errors.hpp"

namespace fqt::qtgen {

int ceil_log2(std::int64_t n) {
  if (n < 1) throw InvalidArgumentError("ceil_log2 needs n >= 1");
  int bits = 0;
  while ((std::int64_t{1} << bits) < n) ++bits;
  return bits;
}

ChunkPlan plan_chunks(std::int64_t m, std::int64_t n_mlp) {
  if (m < 1 || n_mlp < 1) {
    throw InvalidArgumentError("plan_chunks needs m >= 1 and n_mlp >= 1, got m=" +
                               std::to_string(m) + ", n_mlp=" + std::to_string(n_mlp));
  }
  ChunkPlan plan;
  plan.m = m;
  plan.n_mlp = n_mlp;
  plan.n_ch = (m + n_mlp - 1) / n_mlp;
  plan.n_qubits = std::max(1, ceil_log2(plan.n_ch));
  return plan;
}

BasisFeature basis_features(std::int64_t i, const ChunkPlan& plan, std::span<const double> probs) {
  if (i < 0 || i >= plan.n_ch) {
    throw IndexError("chunk index " + std::to_string(i) + " outside [0, " +
                     std::to_string(plan.n_ch) + ")");
  }
  if (probs.size() != plan.basis_dim()) {
    throw ShapeError("expected " + std::to_string(plan.basis_dim()) + " probabilities, got " +
                     std::to_string(probs.size()));
  }
  BasisFeature f;
  f.bits.resize(static_cast<std::size_t>(plan.n_qubits));
  for (int q = 0; q < plan.n_qubits; ++q) f.bits[q] = static_cast<double>((i >> q) & 1);
  f.prob = probs[static_cast<std::size_t>(i)] * static_cast<double>(plan.basis_dim());
  return f;
}

}  // namespace fqt::qtgen
