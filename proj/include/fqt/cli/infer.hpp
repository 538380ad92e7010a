#pragma once

#include <filesystem>
#include <ostream>

#include "fqt/cli/config.hpp"

namespace fqt::cli {

struct InferResult {
  double accuracy = 0.0;
  double loss = 0.0;
  std::size_t samples = 0;
};

/// Classical-only inference: reads FQTW weights and scores the target model
/// on the configured split. Throws FormatError when the file's parameter
/// count differs from the model's.
InferResult infer(const std::filesystem::path& weights, RunConfig config, data::Split split);

/// Prints "accuracy <value>" (17 significant digits) and friends.
void print_infer(std::ostream& out, const InferResult& r);

}  // namespace fqt::cli
