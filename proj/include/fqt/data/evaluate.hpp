#pragma once

#include <cstddef>
#include <span>

#include "fqt/data/dataset.hpp"
#include "fqt/nn/model.hpp"

namespace fqt::data {

struct ClassifierScore {
  double loss = 0.0;      // mean cross-entropy
  double accuracy = 0.0;  // fraction of correct argmax predictions
  std::size_t correct = 0;
};

/// Forward-only evaluation of a classifier over the whole dataset, in
/// fixed-size chunks. Each sample's logits do not depend on the chunking.
ClassifierScore evaluate_classifier(const nn::ModelSpec& spec, std::span<const double> omega,
                                    const Dataset& dataset, std::size_t chunk = 256);

}  // namespace fqt::data
