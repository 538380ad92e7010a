#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fqt/nn/model.hpp"

namespace fqt::data {

enum class Split { kTrain, kTest };

/// Labeled samples stored contiguously, one sample_shape block per label.
struct Dataset {
  nn::Shape sample_shape;
  std::vector<double> inputs;
  std::vector<int> labels;
  int n_classes = 0;
  Split split = Split::kTrain;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_size() const { return nn::numel(sample_shape); }
  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(inputs).subspan(i * sample_size(), sample_size());
  }

  /// Throws InvalidArgumentError on empty data, out-of-range labels,
  /// non-finite inputs, or inconsistent sizes.
  void validate() const;

  /// Copies the listed samples, in order, into a batch.
  nn::Batch gather(std::span<const std::size_t> indices) const;
  Dataset select(std::span<const std::size_t> indices) const;
};

struct TrainTest {
  Dataset train;
  Dataset test;
};

/// Gaussian clusters (unit variance per coordinate). Class k is centred at
/// (separation / sqrt(2)) * e_k, so every pair of class means is exactly
/// `separation` apart. Per class, the first floor(0.8 * n_per_class) draws go
/// to train and the rest to test; both splits are then shuffled.
TrainTest synthetic_blobs(int n_classes, std::size_t n_per_class, std::size_t input_dim,
                          double separation, std::uint64_t seed);

/// Class-stratified random subset of n samples (largest-remainder allocation
/// per class), returned in shuffled order.
Dataset subsample(const Dataset& dataset, std::size_t n, std::uint64_t seed);

/// Most frequent label's share of the dataset.
double majority_class_rate(const Dataset& dataset);

}  // namespace fqt::data
