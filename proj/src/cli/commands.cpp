#include "fqt/cli/commands.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "fqt/bytes.hpp"
#include "fqt/errors.hpp"
#include "fqt/nn/weights_io.hpp"

namespace fqt::cli {

namespace {

constexpr char kCheckpointMagic[4] = {'F', 'Q', 'T', 'C'};
constexpr std::uint16_t kCheckpointVersion = 1;
constexpr std::size_t kCheckpointHeader = 22;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string round_name(int round) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "round_%04d.fqtc", round);
  return buf;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const qtgen::QtParams& params) {
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  bytes::put_le<std::uint16_t>(out, kCheckpointVersion);
  bytes::put_le<std::uint64_t>(out, params.theta.size());
  bytes::put_le<std::uint64_t>(out, params.beta.size());
  for (double v : params.theta) bytes::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  for (double v : params.beta) bytes::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

qtgen::QtParams decode_checkpoint(std::span<const std::uint8_t> data) {
  if (data.size() < kCheckpointHeader || std::memcmp(data.data(), kCheckpointMagic, 4) != 0) {
    throw ShapeError("checkpoint: missing FQTC header");
  }
  const auto version = bytes::get_le<std::uint16_t>(data, 4);
  if (version != kCheckpointVersion) {
    throw ShapeError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto n_theta = bytes::get_le<std::uint64_t>(data, 6);
  const auto n_beta = bytes::get_le<std::uint64_t>(data, 14);
  const std::size_t payload = data.size() - kCheckpointHeader;
  if (payload % 8 != 0 || payload / 8 != n_theta + n_beta) {
    throw ShapeError("checkpoint: header declares " + std::to_string(n_theta) + " + " +
                     std::to_string(n_beta) + " values, payload holds " + std::to_string(payload) +
                     " bytes");
  }
  qtgen::QtParams p;
  p.theta.resize(n_theta);
  p.beta.resize(n_beta);
  std::size_t offset = kCheckpointHeader;
  for (auto* vec : {&p.theta, &p.beta}) {
    for (auto& v : *vec) {
      v = std::bit_cast<double>(bytes::get_le<std::uint64_t>(data, offset));
      offset += 8;
    }
  }
  return p;
}

void write_checkpoint(const std::filesystem::path& path, const qtgen::QtParams& params) {
  bytes::write_file(path, encode_checkpoint(params));
}

qtgen::QtParams read_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(bytes::read_file(path));
  } catch (const ShapeError& e) {
    throw ShapeError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw ShapeError(std::string(e.what()));
  }
}

PlanReport make_plan_report(std::int64_t m, std::int64_t n_mlp, std::span<const std::size_t> hidden,
                            int layers) {
  PlanReport r;
  r.plan = qtgen::plan_chunks(m, n_mlp);
  const qsim::AnsatzSpec ansatz{r.plan.n_qubits, layers};
  ansatz.validate();
  r.layers = layers;
  r.theta_count = ansatz.param_count();
  r.beta_count = qtgen::mapping_param_count(r.plan.n_qubits, hidden, n_mlp);
  return r;
}

void print_plan(std::ostream& out, const PlanReport& r, bool json) {
  if (json) {
    nlohmann::ordered_json j;
    j["m"] = r.plan.m;
    j["n_mlp"] = r.plan.n_mlp;
    j["n_ch"] = r.plan.n_ch;
    j["n_qubits"] = r.plan.n_qubits;
    j["layers"] = r.layers;
    j["theta"] = r.theta_count;
    j["beta"] = r.beta_count;
    j["trainable"] = r.trainable();
    j["compression"] = r.compression();
    j["vanilla"] = r.plan.n_mlp == 1;
    out << j.dump(2) << "\n";
    return;
  }
  out << "target parameters (m)   " << r.plan.m << "\n"
      << "chunk size (n_mlp)      " << r.plan.n_mlp << (r.plan.n_mlp == 1 ? "  (vanilla QT)" : "")
      << "\n"
      << "chunks (n_ch)           " << r.plan.n_ch << "\n"
      << "qubits (N)              " << r.plan.n_qubits << "\n"
      << "ansatz layers (L)       " << r.layers << "\n"
      << "|theta| = L(6N-3)       " << r.theta_count << "\n"
      << "|beta|                  " << r.beta_count << "\n"
      << "trainable total         " << r.trainable() << "\n"
      << "compression vs m        " << fmt(r.compression()) << "\n";
}

fed::QtSetup make_setup(const RunConfig& config) {
  return fed::QtSetup::make(make_target(config), config.n_mlp, config.ansatz_layers, config.hidden);
}

fed::FederatedConfig make_federated_config(const RunConfig& c) {
  fed::FederatedConfig f;
  f.n_clients = c.clients;
  f.n_rounds = c.rounds;
  f.local_epochs = c.local_epochs;
  f.batch_size = c.batch_size;
  f.learning_rate = c.learning_rate;
  f.seed = c.seed;
  f.aggregation = fed::parse_aggregation(c.aggregation);
  f.threads = c.threads;
  return f;
}

fed::FederatedRun train(RunConfig config, std::ostream& log) {
  namespace fs = std::filesystem;
  config.validate();
  // Everything that can fail on bad input happens before the first write.
  const fed::QtSetup setup = make_setup(config);
  const fed::FederatedConfig fcfg = make_federated_config(config);
  fcfg.validate();
  const data::TrainTest data = load_data(config);
  if (static_cast<std::size_t>(fcfg.n_clients) > data.train.size()) {
    throw InvalidArgumentError("more clients than training samples");
  }

  const fs::path dir = config.output_dir;
  fs::create_directories(dir / "checkpoints");
  const fs::path marker = dir / "INCOMPLETE";
  { std::ofstream(marker) << "run in progress or aborted\n"; }
  {
    std::ofstream cfg_out(dir / "config.resolved.ini");
    cfg_out << to_ini(config);
  }

  std::ofstream csv(dir / "metrics.csv", std::ios::trunc);
  csv << "round,client_id,train_loss,train_acc,test_acc\n";

  log << "qubits " << setup.plan.n_qubits << ", chunks " << setup.plan.n_ch << ", m "
      << setup.plan.m << "\n";
  auto on_round = [&](const fed::RoundMetrics& m, const qtgen::QtParams& global) {
    for (std::size_t c = 0; c < m.client_loss.size(); ++c) {
      csv << m.round << "," << c << "," << fmt(m.client_loss[c]) << ",,\n";
    }
    csv << m.round << ",GLOBAL," << fmt(m.train_loss) << "," << fmt(m.train_acc) << ","
        << fmt(m.test_acc) << "\n";
    csv.flush();
    write_checkpoint(dir / "checkpoints" / round_name(m.round), global);
    log << "round " << m.round << "  train_loss " << fmt(m.train_loss) << "  train_acc "
        << fmt(m.train_acc) << "  test_acc " << fmt(m.test_acc) << "\n";
  };
  fed::FederatedRun run = fed::run_federated(fcfg, setup, data, on_round);

  const qtgen::Generator gen(setup.ansatz, setup.plan, setup.hidden, run.final_params);
  nn::write_fqtw(dir / "weights.fqtw", gen.generate_params().omega);
  fs::remove(marker);
  return run;
}

void generate(const RunConfig& config, const std::filesystem::path& checkpoint,
              const std::filesystem::path& out) {
  const fed::QtSetup setup = make_setup(config);
  qtgen::QtParams params = read_checkpoint(checkpoint);
  const qtgen::Generator gen(setup.ansatz, setup.plan, setup.hidden, std::move(params));
  nn::write_fqtw(out, gen.generate_params().omega);
}

}  // namespace fqt::cli
