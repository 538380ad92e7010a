#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fqt/data/dataset.hpp"
#include "fqt/nn/model.hpp"
#include "fqt/qsim/ansatz.hpp"
#include "fqt/qtgen/chunk_plan.hpp"
#include "fqt/qtgen/generator.hpp"

namespace fqt::fed {

enum class Aggregation { kUniform, kSizeWeighted };

std::string to_string(Aggregation a);
Aggregation parse_aggregation(const std::string& s);

struct FederatedConfig {
  int n_clients = 4;
  int n_rounds = 1;
  int local_epochs = 1;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  Aggregation aggregation = Aggregation::kUniform;
  int threads = 1;  // clients trained concurrently within a round

  /// Throws InvalidArgumentError on non-positive counts or learning rate.
  void validate() const;
};

/// Everything that fixes the shapes of a Quantum-Train run.
struct QtSetup {
  qsim::AnsatzSpec ansatz;
  qtgen::ChunkPlan plan;
  std::vector<std::size_t> hidden;
  nn::ModelSpec target;

  /// Derives the ansatz width and chunk plan from the target model.
  static QtSetup make(nn::ModelSpec target, std::int64_t n_mlp, int n_layers,
                      std::vector<std::size_t> hidden);

  /// Throws ShapeError when the plan does not cover the target model.
  void validate() const;
};

/// Initial (theta, beta) for a run seed. Every participant of a run starts
/// from this point.
qtgen::QtParams initial_params(const QtSetup& setup, std::uint64_t seed);

/// Private RNG stream of one client, keyed by (run seed, client id).
std::mt19937_64 client_stream(std::uint64_t seed, int client_id);

/// IID split of indices 0..n-1: one seeded permutation cut into n_clients
/// contiguous shards whose sizes differ by at most one (larger shards
/// first).
std::vector<std::vector<std::size_t>> partition_dataset(std::size_t n, int n_clients,
                                                        std::uint64_t seed);

struct ClientState {
  int id = 0;
  std::vector<std::size_t> shard;
  std::mt19937_64 rng;
};

std::vector<ClientState> make_clients(std::size_t dataset_size, const FederatedConfig& cfg);

struct LocalResult {
  qtgen::QtParams params;
  std::vector<double> loss_trace;  // one entry per mini-batch
};

/// One client's round: start from the broadcast parameters, run
/// local_epochs shuffled passes over the shard, one Adam step per
/// mini-batch. Adam state starts fresh every call.
LocalResult local_train(ClientState& client, const qtgen::QtParams& global,
                        const FederatedConfig& cfg, const QtSetup& setup,
                        const data::Dataset& train);

/// Weighted elementwise mean of client parameters, weights normalized to
/// sum to one and applied in list order.
qtgen::QtParams aggregate(std::span<const qtgen::QtParams> params, std::span<const double> weights);

struct Evaluation {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
};

/// Generates omega once, rounds it to export precision, and scores the
/// target model on both splits.
Evaluation evaluate_global(const QtSetup& setup, const qtgen::QtParams& params,
                           const data::TrainTest& data);

struct RoundMetrics {
  int round = 0;  // 1-based
  std::vector<double> client_loss;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double wall_seconds = 0.0;
};

struct FederatedRun {
  Evaluation initial;
  std::vector<RoundMetrics> rounds;
  qtgen::QtParams final_params;
};

using RoundCallback = std::function<void(const RoundMetrics&, const qtgen::QtParams&)>;

/// Broadcast, local training, aggregation and evaluation, repeated
/// n_rounds times. `on_round` sees each round's metrics and the new global
/// parameters.
FederatedRun run_federated(const FederatedConfig& cfg, const QtSetup& setup,
                           const data::TrainTest& data, const RoundCallback& on_round = {});

/// Single-node reference trainer: n_rounds epochs over the whole training
/// set in the order a lone client would see it, resetting Adam at every
/// epoch boundary. Returns the parameters after each epoch.
std::vector<qtgen::QtParams> train_centralized(const FederatedConfig& cfg, const QtSetup& setup,
                                               const data::Dataset& train);

}  // namespace fqt::fed
