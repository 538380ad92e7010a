#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fqt/data/dataset.hpp"
#include "fqt/nn/model.hpp"

namespace fqt::cli {

// Run configuration file grammar (INI-like):
//
//   file    := { line }
//   line    := blank | comment | section | entry
//   comment := ('#' | ';') text
//   section := '[' name ']'
//   entry   := key '=' value          (whitespace around key and value trimmed)
//
// Every entry must sit inside a known section and use a known key; duplicate
// keys are rejected. Lists are comma-separated. Sections and keys:
//
//   [run]        seed, output_dir
//   [model]      preset                   mlp_tiny | vgg_small
//   [ansatz]     layers
//   [generator]  n_mlp, hidden            e.g. hidden = 32,32
//   [federated]  clients, rounds, local_epochs, batch_size, learning_rate,
//                aggregation (uniform | size_weighted), threads
//   [data]       source (blobs | cifar10)
//                blobs:   classes, per_class, input_dim, separation, data_seed
//                cifar10: cifar_dir, train_subset, test_subset, subset_seed,
//                         norm_mean, norm_std (3 values each; computed from
//                         the training split when omitted)
//
// The qubit count is never configured; it follows from the target model
// size and n_mlp.

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "run";

  std::string model_preset = "mlp_tiny";

  int ansatz_layers = 5;

  std::int64_t n_mlp = 16;
  std::vector<std::size_t> hidden = {32, 32};

  int clients = 4;
  int rounds = 30;
  int local_epochs = 1;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::string aggregation = "uniform";
  int threads = 1;

  std::string data_source = "blobs";
  int blob_classes = 3;
  std::size_t blob_per_class = 200;
  std::size_t blob_input_dim = 16;
  double blob_separation = 4.0;
  std::uint64_t data_seed = 0;

  std::string cifar_dir;
  std::size_t cifar_train_subset = 0;  // 0 keeps the full split
  std::size_t cifar_test_subset = 0;
  std::uint64_t subset_seed = 0;
  std::optional<std::array<double, 3>> norm_mean;
  std::optional<std::array<double, 3>> norm_std;

  /// Cross-field checks; throws InvalidArgumentError.
  void validate() const;
};

/// Parses config text; `source` names the origin in error messages.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Serializes with every field materialized, such that parse_config(to_ini(c))
/// reproduces c exactly.
std::string to_ini(const RunConfig& config);

/// Per-sample input shape and class count implied by the data section.
nn::Shape sample_shape(const RunConfig& config);
int class_count(const RunConfig& config);

/// Target classifier described by [model] and [data].
nn::ModelSpec make_target(const RunConfig& config);

/// Materializes the dataset. For CIFAR-10 without fixed normalization the
/// constants computed from the training split are written back into
/// `config`.
data::TrainTest load_data(RunConfig& config);

}  // namespace fqt::cli
