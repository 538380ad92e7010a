#include "fqt/fed/federated.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "fqt/data/evaluate.hpp"
#include "fqt/errors.hpp"
#include "fqt/nn/adam.hpp"
#include "fqt/nn/weights_io.hpp"

namespace fqt::fed {

namespace {

// Stream tags keep the initialization, partition and client streams apart.
constexpr std::uint32_t kInitTag = 0x1417;
constexpr std::uint32_t kPartitionTag = 0x9a27;
constexpr std::uint32_t kClientTag = 0xc11e;

std::mt19937_64 keyed_stream(std::uint64_t seed, std::uint32_t tag, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag,
                    id};
  return std::mt19937_64(seq);
}

// One Adam step on a single mini-batch; returns the batch loss.
double train_step(qtgen::Generator& gen, nn::Adam& opt, const QtSetup& setup,
                  const nn::Batch& batch) {
  const qtgen::Generation g = gen.generate_params();
  const nn::LossAndGrad lg = nn::loss_and_grad(setup.target, g.omega, batch);
  const qtgen::QtParams grads = gen.backprop_generation(lg.d_omega, g.tape);
  std::vector<double> flat = gen.params().flat();
  opt.step(flat, grads.flat());
  gen.set_flat(flat);
  return lg.loss;
}

void run_epoch(std::vector<std::size_t>& order, std::mt19937_64& rng, std::size_t batch_size,
               qtgen::Generator& gen, nn::Adam& opt, const QtSetup& setup,
               const data::Dataset& train, std::vector<double>& trace) {
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
    const std::size_t end = std::min(order.size(), begin + batch_size);
    const nn::Batch batch =
        train.gather(std::span<const std::size_t>(order).subspan(begin, end - begin));
    trace.push_back(train_step(gen, opt, setup, batch));
  }
}

}  // namespace

std::string to_string(Aggregation a) {
  return a == Aggregation::kUniform ? "uniform" : "size_weighted";
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "uniform") return Aggregation::kUniform;
  if (s == "size_weighted") return Aggregation::kSizeWeighted;
  throw InvalidArgumentError("unknown aggregation '" + s + "' (expected uniform|size_weighted)");
}

void FederatedConfig::validate() const {
  if (n_clients < 1 || n_rounds < 1 || local_epochs < 1 || batch_size < 1 || threads < 1) {
    throw InvalidArgumentError(
        "clients, rounds, local epochs, batch size and threads must all be >= 1");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgumentError("learning rate must be positive and finite");
  }
}

QtSetup QtSetup::make(nn::ModelSpec target, std::int64_t n_mlp, int n_layers,
                      std::vector<std::size_t> hidden) {
  const qtgen::ChunkPlan plan =
      qtgen::plan_chunks(static_cast<std::int64_t>(target.param_count()), n_mlp);
  QtSetup s{qsim::AnsatzSpec{plan.n_qubits, n_layers}, plan, std::move(hidden), std::move(target)};
  s.validate();
  return s;
}

void QtSetup::validate() const {
  ansatz.validate();
  if (ansatz.n_qubits != plan.n_qubits) {
    throw ShapeError("ansatz width differs from the chunk plan");
  }
  if (plan.m != static_cast<std::int64_t>(target.param_count())) {
    throw ShapeError("chunk plan covers m = " + std::to_string(plan.m) +
                     " but the target model has " + std::to_string(target.param_count()) +
                     " parameters");
  }
  if (target.output_shape().size() != 1) throw ShapeError("target model must end in a flat layer");
}

qtgen::QtParams initial_params(const QtSetup& setup, std::uint64_t seed) {
  auto rng = keyed_stream(seed, kInitTag, 0);
  return qtgen::Generator::initialize(setup.ansatz, setup.plan, setup.hidden, rng()).params();
}

std::mt19937_64 client_stream(std::uint64_t seed, int client_id) {
  return keyed_stream(seed, kClientTag, static_cast<std::uint32_t>(client_id));
}

std::vector<std::vector<std::size_t>> partition_dataset(std::size_t n, int n_clients,
                                                        std::uint64_t seed) {
  if (n_clients < 1 || static_cast<std::size_t>(n_clients) > n) {
    throw InvalidArgumentError("cannot split " + std::to_string(n) + " samples across " +
                               std::to_string(n_clients) + " clients");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto rng = keyed_stream(seed, kPartitionTag, 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  const std::size_t k = static_cast<std::size_t>(n_clients);
  std::vector<std::vector<std::size_t>> shards(k);
  std::size_t begin = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t len = n / k + (c < n % k ? 1 : 0);
    shards[c].assign(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                     perm.begin() + static_cast<std::ptrdiff_t>(begin + len));
    begin += len;
  }
  return shards;
}

std::vector<ClientState> make_clients(std::size_t dataset_size, const FederatedConfig& cfg) {
  auto shards = partition_dataset(dataset_size, cfg.n_clients, cfg.seed);
  std::vector<ClientState> clients;
  clients.reserve(shards.size());
  for (std::size_t c = 0; c < shards.size(); ++c) {
    const int id = static_cast<int>(c);
    clients.push_back({id, std::move(shards[c]), client_stream(cfg.seed, id)});
  }
  return clients;
}

LocalResult local_train(ClientState& client, const qtgen::QtParams& global,
                        const FederatedConfig& cfg, const QtSetup& setup,
                        const data::Dataset& train) {
  LocalResult result;
  if (client.shard.empty()) {
    result.params = global;
    return result;
  }
  qtgen::Generator gen(setup.ansatz, setup.plan, setup.hidden, global);
  nn::Adam opt(gen.trainable_count(), nn::AdamConfig{cfg.learning_rate});
  std::vector<std::size_t> order = client.shard;
  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    run_epoch(order, client.rng, cfg.batch_size, gen, opt, setup, train, result.loss_trace);
  }
  result.params = gen.params();
  return result;
}

qtgen::QtParams aggregate(std::span<const qtgen::QtParams> params, std::span<const double> weights) {
  if (params.empty()) throw InvalidArgumentError("nothing to aggregate");
  if (weights.size() != params.size()) {
    throw InvalidArgumentError("got " + std::to_string(weights.size()) + " weights for " +
                               std::to_string(params.size()) + " clients");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgumentError("weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgumentError("aggregation weights sum to zero");

  const std::size_t n_theta = params.front().theta.size();
  const std::size_t n_beta = params.front().beta.size();
  qtgen::QtParams out{std::vector<double>(n_theta, 0.0), std::vector<double>(n_beta, 0.0)};
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].theta.size() != n_theta || params[k].beta.size() != n_beta) {
      throw InvalidArgumentError("client " + std::to_string(k) + " sent parameters of a different shape");
    }
    const double w = weights[k] / total;
    for (std::size_t i = 0; i < n_theta; ++i) out.theta[i] += w * params[k].theta[i];
    for (std::size_t i = 0; i < n_beta; ++i) out.beta[i] += w * params[k].beta[i];
  }
  return out;
}

Evaluation evaluate_global(const QtSetup& setup, const qtgen::QtParams& params,
                           const data::TrainTest& data) {
  const qtgen::Generator gen(setup.ansatz, setup.plan, setup.hidden, params);
  const auto omega = nn::round_to_export_precision(gen.generate_params().omega);
  const auto train = data::evaluate_classifier(setup.target, omega, data.train);
  const auto test = data::evaluate_classifier(setup.target, omega, data.test);
  return {train.loss, train.accuracy, test.loss, test.accuracy};
}

FederatedRun run_federated(const FederatedConfig& cfg, const QtSetup& setup,
                           const data::TrainTest& data, const RoundCallback& on_round) {
  cfg.validate();
  setup.validate();
  data.train.validate();
  data.test.validate();
  if (data.train.sample_shape != setup.target.input_shape()) {
    throw ShapeError("training inputs " + nn::to_string(data.train.sample_shape) +
                     " do not match the target model input " +
                     nn::to_string(setup.target.input_shape()));
  }

  FederatedRun run;
  qtgen::QtParams global = initial_params(setup, cfg.seed);
  run.initial = evaluate_global(setup, global, data);
  std::vector<ClientState> clients = make_clients(data.train.size(), cfg);

  std::vector<double> weights(clients.size(), 1.0);
  if (cfg.aggregation == Aggregation::kSizeWeighted) {
    for (std::size_t c = 0; c < clients.size(); ++c) {
      weights[c] = static_cast<double>(clients[c].shard.size());
    }
  }

  for (int round = 1; round <= cfg.n_rounds; ++round) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<LocalResult> local(clients.size());
    auto train_client = [&](std::size_t c) {
      local[c] = local_train(clients[c], global, cfg, setup, data.train);
    };
    if (cfg.threads > 1 && clients.size() > 1) {
      // Clients share nothing mutable; results land in per-client slots.
      for (std::size_t first = 0; first < clients.size(); first += static_cast<std::size_t>(cfg.threads)) {
        const std::size_t last = std::min(clients.size(), first + static_cast<std::size_t>(cfg.threads));
        std::vector<std::jthread> workers;
        for (std::size_t c = first; c < last; ++c) workers.emplace_back(train_client, c);
      }
    } else {
      for (std::size_t c = 0; c < clients.size(); ++c) train_client(c);
    }

    std::vector<qtgen::QtParams> uploads;
    uploads.reserve(local.size());
    RoundMetrics metrics;
    metrics.round = round;
    for (auto& r : local) {
      const double mean = r.loss_trace.empty()
                              ? 0.0
                              : std::accumulate(r.loss_trace.begin(), r.loss_trace.end(), 0.0) /
                                    static_cast<double>(r.loss_trace.size());
      metrics.client_loss.push_back(mean);
      uploads.push_back(std::move(r.params));
    }
    global = aggregate(uploads, weights);

    const Evaluation eval = evaluate_global(setup, global, data);
    metrics.train_loss = eval.train_loss;
    metrics.train_acc = eval.train_acc;
    metrics.test_acc = eval.test_acc;
    metrics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_round) on_round(metrics, global);
    run.rounds.push_back(std::move(metrics));
  }
  run.final_params = std::move(global);
  return run;
}

std::vector<qtgen::QtParams> train_centralized(const FederatedConfig& cfg, const QtSetup& setup,
                                               const data::Dataset& train) {
  cfg.validate();
  setup.validate();
  const std::vector<std::size_t> base = partition_dataset(train.size(), 1, cfg.seed).front();
  std::mt19937_64 rng = client_stream(cfg.seed, 0);
  qtgen::Generator gen(setup.ansatz, setup.plan, setup.hidden, initial_params(setup, cfg.seed));
  nn::Adam opt(gen.trainable_count(), nn::AdamConfig{cfg.learning_rate});

  std::vector<qtgen::QtParams> history;
  for (int epoch = 0; epoch < cfg.n_rounds; ++epoch) {
    opt.reset();
    std::vector<std::size_t> order = base;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - begin);
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                   order.begin() + static_cast<std::ptrdiff_t>(begin + len));
      const nn::Batch batch = train.gather(idx);
      const qtgen::Generation g = gen.generate_params();
      const auto d_omega = nn::loss_and_grad(setup.target, g.omega, batch).d_omega;
      const qtgen::QtParams grads = gen.backprop_generation(d_omega, g.tape);
      std::vector<double> flat = gen.params().flat();
      opt.step(flat, grads.flat());
      gen.set_flat(flat);
    }
    history.push_back(gen.params());
  }
  return history;
}

}  // namespace fqt::fed
