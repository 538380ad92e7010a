#include "fqt/qtgen/generator.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fqt/errors.hpp"

namespace fqt::qtgen {

namespace {

std::uint64_t next_generator_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

nn::ModelSpec mapping_spec(const ChunkPlan& plan, std::span<const std::size_t> hidden) {
  std::vector<nn::Layer> layers;
  std::size_t width = static_cast<std::size_t>(plan.n_qubits) + 1;
  for (std::size_t h : hidden) {
    if (h == 0) throw InvalidArgumentError("hidden layer widths must be positive");
    layers.push_back(nn::Layer::dense(width, h));
    layers.push_back(nn::Layer::tanh());
    width = h;
  }
  layers.push_back(nn::Layer::dense(width, static_cast<std::size_t>(plan.n_mlp)));
  return nn::ModelSpec({static_cast<std::size_t>(plan.n_qubits) + 1}, std::move(layers));
}

std::size_t mapping_param_count(int n_qubits, std::span<const std::size_t> hidden,
                                std::int64_t n_mlp) {
  std::size_t width = static_cast<std::size_t>(n_qubits) + 1;
  std::size_t count = 0;
  for (std::size_t h : hidden) {
    count += width * h + h;
    width = h;
  }
  return count + width * static_cast<std::size_t>(n_mlp) + static_cast<std::size_t>(n_mlp);
}

std::vector<double> QtParams::flat() const {
  std::vector<double> out(theta);
  out.insert(out.end(), beta.begin(), beta.end());
  return out;
}

void QtParams::assign_flat(std::span<const double> flat) {
  if (flat.size() != size()) {
    throw ShapeError("flat parameter vector has " + std::to_string(flat.size()) +
                     " entries, expected " + std::to_string(size()));
  }
  std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(theta.size()), theta.begin());
  std::copy(flat.begin() + static_cast<std::ptrdiff_t>(theta.size()), flat.end(), beta.begin());
}

Generator::Generator(qsim::AnsatzSpec ansatz, ChunkPlan plan, std::vector<std::size_t> hidden,
                     QtParams params)
    : ansatz_(ansatz),
      plan_(plan),
      hidden_(std::move(hidden)),
      mapping_(mapping_spec(plan_, hidden_)),
      params_(std::move(params)),
      id_(next_generator_id()) {
  validate();
}

Generator::Generator(const Generator& other)
    : ansatz_(other.ansatz_),
      plan_(other.plan_),
      hidden_(other.hidden_),
      mapping_(other.mapping_),
      params_(other.params_),
      id_(next_generator_id()) {}

Generator& Generator::operator=(const Generator& other) {
  if (this != &other) {
    ansatz_ = other.ansatz_;
    plan_ = other.plan_;
    hidden_ = other.hidden_;
    mapping_ = other.mapping_;
    params_ = other.params_;
    id_ = next_generator_id();
    version_ = 0;
  }
  return *this;
}

void Generator::validate() const {
  ansatz_.validate();
  if (ansatz_.n_qubits != plan_.n_qubits) {
    throw ShapeError("ansatz has " + std::to_string(ansatz_.n_qubits) + " qubits, chunk plan needs " +
                     std::to_string(plan_.n_qubits));
  }
  if (params_.theta.size() != ansatz_.param_count()) {
    throw ShapeError("theta has " + std::to_string(params_.theta.size()) + " entries, expected " +
                     std::to_string(ansatz_.param_count()));
  }
  if (params_.beta.size() != mapping_.param_count()) {
    throw ShapeError("beta has " + std::to_string(params_.beta.size()) + " entries, expected " +
                     std::to_string(mapping_.param_count()));
  }
}

Generator Generator::initialize(qsim::AnsatzSpec ansatz, ChunkPlan plan,
                                std::vector<std::size_t> hidden, std::uint64_t seed) {
  const nn::ModelSpec mapping = mapping_spec(plan, hidden);
  std::mt19937_64 rng(seed);
  QtParams params;
  ansatz.validate();
  params.theta.resize(ansatz.param_count());
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (auto& t : params.theta) t = angle(rng);

  params.beta.resize(mapping.param_count());
  for (std::size_t l = 0; l < mapping.layers().size(); ++l) {
    const nn::Layer& layer = mapping.layers()[l];
    if (layer.kind != nn::LayerKind::kDense) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    std::uniform_real_distribution<double> w(-bound, bound);
    const std::size_t begin = mapping.param_offset(l);
    for (std::size_t k = 0; k < mapping.layer_param_count(l); ++k) params.beta[begin + k] = w(rng);
  }
  return Generator(ansatz, plan, std::move(hidden), std::move(params));
}

void Generator::set_params(QtParams params) {
  std::swap(params_, params);
  try {
    validate();
  } catch (...) {
    std::swap(params_, params);
    throw;
  }
  ++version_;
}

void Generator::set_flat(std::span<const double> flat) {
  params_.assign_flat(flat);
  ++version_;
}

Generation Generator::generate_params() const {
  Generation gen;
  gen.tape.owner = id_;
  gen.tape.version = version_;
  gen.tape.state = qsim::run_ansatz(ansatz_, params_.theta);
  gen.tape.probs = qsim::probabilities(gen.tape.state);

  const std::size_t width = static_cast<std::size_t>(plan_.n_qubits) + 1;
  const std::size_t n_ch = static_cast<std::size_t>(plan_.n_ch);
  std::vector<double> inputs(n_ch * width);
  for (std::size_t i = 0; i < n_ch; ++i) {
    const BasisFeature f = basis_features(static_cast<std::int64_t>(i), plan_, gen.tape.probs);
    std::copy(f.bits.begin(), f.bits.end(), inputs.begin() + static_cast<std::ptrdiff_t>(i * width));
    inputs[i * width + width - 1] = f.prob;
  }
  gen.omega = nn::forward(mapping_, params_.beta, inputs, n_ch, &gen.tape.mapping);
  gen.omega.resize(static_cast<std::size_t>(plan_.m));
  return gen;
}

QtParams Generator::backprop_generation(std::span<const double> dL_domega,
                                        const GenerationTape& tape) const {
  if (tape.owner != id_ || tape.version != version_) {
    throw InvalidStateError("generation tape is stale: parameters changed since it was recorded");
  }
  if (dL_domega.size() != static_cast<std::size_t>(plan_.m)) {
    throw ShapeError("dL/domega has " + std::to_string(dL_domega.size()) + " entries, expected " +
                     std::to_string(plan_.m));
  }
  // Truncated tail outputs receive zero gradient.
  std::vector<double> d_out(static_cast<std::size_t>(plan_.generated()), 0.0);
  std::copy(dL_domega.begin(), dL_domega.end(), d_out.begin());
  nn::Gradients g = nn::backward(mapping_, params_.beta, tape.mapping, d_out);

  const std::size_t width = static_cast<std::size_t>(plan_.n_qubits) + 1;
  const double scale = static_cast<double>(plan_.basis_dim());
  std::vector<double> dL_dp(plan_.basis_dim(), 0.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(plan_.n_ch); ++i) {
    dL_dp[i] = g.d_input[i * width + width - 1] * scale;
  }
  QtParams grads;
  grads.theta = qsim::grad_ansatz(ansatz_, params_.theta, dL_dp, &tape.state);
  grads.beta = std::move(g.d_omega);
  return grads;
}

}  // namespace fqt::qtgen
