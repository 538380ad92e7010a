#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "fqt/cli/config.hpp"
#include "fqt/fed/federated.hpp"
#include "fqt/qtgen/generator.hpp"

namespace fqt::cli {

// FQTC checkpoint of generator parameters, little-endian:
//
//   offset  size  field
//   0       4     magic "FQTC"
//   4       2     format version (u16, currently 1)
//   6       8     |theta| (u64)
//   14      8     |beta| (u64)
//   22      8*(|theta|+|beta|)  theta then beta as IEEE-754 binary64

std::vector<std::uint8_t> encode_checkpoint(const qtgen::QtParams& params);
/// Throws ShapeError when the declared lengths disagree with the payload.
qtgen::QtParams decode_checkpoint(std::span<const std::uint8_t> bytes);
void write_checkpoint(const std::filesystem::path& path, const qtgen::QtParams& params);
qtgen::QtParams read_checkpoint(const std::filesystem::path& path);

struct PlanReport {
  qtgen::ChunkPlan plan;
  int layers = 0;
  std::size_t theta_count = 0;
  std::size_t beta_count = 0;

  std::size_t trainable() const { return theta_count + beta_count; }
  double compression() const { return static_cast<double>(trainable()) / static_cast<double>(plan.m); }
};

PlanReport make_plan_report(std::int64_t m, std::int64_t n_mlp, std::span<const std::size_t> hidden,
                            int layers);
void print_plan(std::ostream& out, const PlanReport& r, bool json);

/// Generator shapes implied by a run config.
fed::QtSetup make_setup(const RunConfig& config);
fed::FederatedConfig make_federated_config(const RunConfig& config);

/// Runs a federated training job and writes, under config.output_dir:
///   config.resolved.ini   every setting, defaults materialized
///   metrics.csv           round,client_id,train_loss,train_acc,test_acc
///   checkpoints/round_NNNN.fqtc
///   weights.fqtw          final generated target weights
/// An INCOMPLETE marker file exists while the run is in progress.
fed::FederatedRun train(RunConfig config, std::ostream& log);

/// One generation pass from a checkpoint, written as FQTW.
void generate(const RunConfig& config, const std::filesystem::path& checkpoint,
              const std::filesystem::path& out);

}  // namespace fqt::cli
