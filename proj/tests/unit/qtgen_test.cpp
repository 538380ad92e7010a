#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "dense_oracle.hpp"
#include "fqt/errors.hpp"
#include "fqt/nn/presets.hpp"
#include "fqt/qsim/statevector.hpp"
#include "fqt/qtgen/chunk_plan.hpp"
#include "fqt/qtgen/generator.hpp"
#include "test_support.hpp"

namespace {

using fqt::qsim::AnsatzSpec;
using fqt::qtgen::ChunkPlan;
using fqt::qtgen::Generator;
using fqt::qtgen::plan_chunks;
using fqt::qtgen::QtParams;
using fqt::testing::finite_difference;
using fqt::testing::relative_error;
using fqt::testing::uniform_vector;

Generator make_generator(std::int64_t m, std::int64_t n_mlp, int layers,
                         std::vector<std::size_t> hidden, std::uint64_t seed) {
  const ChunkPlan plan = plan_chunks(m, n_mlp);
  return Generator::initialize(AnsatzSpec{plan.n_qubits, layers}, plan, std::move(hidden), seed);
}

// Weighted sum of omega, evaluated with a fresh generator so no state leaks.
double linear_loss(const Generator& g, std::span<const double> flat, std::span<const double> w) {
  Generator copy = g;
  copy.set_flat(flat);
  const auto omega = copy.generate_params().omega;
  double s = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) s += w[i] * omega[i];
  return s;
}

TEST(PlanChunks, TargetCnnSizes) {
  const auto p2000 = plan_chunks(285226, 2000);
  EXPECT_EQ(p2000.n_ch, 143);
  EXPECT_EQ(p2000.n_qubits, 8);
  EXPECT_EQ(plan_chunks(285226, 1000).n_qubits, 9);
  const auto p500 = plan_chunks(285226, 500);
  EXPECT_EQ(p500.n_ch, 571);
  EXPECT_EQ(p500.n_qubits, 10);
  EXPECT_EQ(plan_chunks(285226, 1).n_qubits, 19);
}

TEST(PlanChunks, SmallCases) {
  const auto p = plan_chunks(8, 4);
  EXPECT_EQ(p.n_ch, 2);
  EXPECT_EQ(p.n_qubits, 1);
  EXPECT_EQ(plan_chunks(1, 1).n_qubits, 1);
  EXPECT_EQ(plan_chunks(5, 10).n_ch, 1);
  EXPECT_EQ(plan_chunks(5, 10).n_qubits, 1);
}

TEST(PlanChunks, InvariantsHold) {
  for (std::int64_t m = 1; m <= 300; m += 7) {
    for (std::int64_t n = 1; n <= 40; n += 3) {
      const auto p = plan_chunks(m, n);
      EXPECT_GE(p.n_ch * n, m);
      EXPECT_LT(p.n_ch * n, m + n);
      EXPECT_LE(p.n_ch, static_cast<std::int64_t>(p.basis_dim()));
      EXPECT_GE(p.n_qubits, 1);
      if (p.n_qubits > 1) {
        EXPECT_GT(p.n_ch, std::int64_t{1} << (p.n_qubits - 1));
      }
    }
  }
}

TEST(PlanChunks, RejectsNonPositive) {
  EXPECT_THROW(plan_chunks(0, 4), fqt::InvalidArgumentError);
  EXPECT_THROW(plan_chunks(10, 0), fqt::InvalidArgumentError);
  EXPECT_THROW(plan_chunks(-3, 2), fqt::InvalidArgumentError);
}

TEST(BasisFeatures, UniformProbabilities) {
  const auto plan = plan_chunks(64, 8);
  ASSERT_EQ(plan.n_qubits, 3);
  const std::vector<double> probs(8, 1.0 / 8.0);
  const auto f = fqt::qtgen::basis_features(0, plan, probs);
  EXPECT_EQ(f.bits, (std::vector<double>{0, 0, 0}));
  EXPECT_DOUBLE_EQ(f.prob, 1.0);
  EXPECT_EQ(fqt::qtgen::basis_features(5, plan, probs).bits, (std::vector<double>{1, 0, 1}));
}

TEST(BasisFeatures, LargePlanIndex) {
  const auto plan = plan_chunks(285226, 2000);
  const auto probs = uniform_vector(256, 0.0, 0.01, 5);
  const auto f = fqt::qtgen::basis_features(142, plan, probs);
  // 142 = 0b10001110, least-significant bit first.
  EXPECT_EQ(f.bits, (std::vector<double>{0, 1, 1, 1, 0, 0, 0, 1}));
  EXPECT_EQ(f.prob, probs[142] * 256.0);
}

TEST(BasisFeatures, Errors) {
  const auto plan = plan_chunks(285226, 2000);
  const std::vector<double> probs(256, 0.0);
  EXPECT_THROW(fqt::qtgen::basis_features(143, plan, probs), fqt::IndexError);
  EXPECT_THROW(fqt::qtgen::basis_features(-1, plan, probs), fqt::IndexError);
  const std::vector<double> short_probs(128, 0.0);
  EXPECT_THROW(fqt::qtgen::basis_features(0, plan, short_probs), fqt::ShapeError);
}

TEST(Mapping, ParamCountAgreesWithSpec) {
  const std::vector<std::size_t> hidden = {32, 32};
  const auto plan = plan_chunks(285226, 500);
  EXPECT_EQ(fqt::qtgen::mapping_param_count(plan.n_qubits, hidden, plan.n_mlp),
            fqt::qtgen::mapping_spec(plan, hidden).param_count());
  // (11*32+32) + (32*32+32) + (32*500+500)
  EXPECT_EQ(fqt::qtgen::mapping_param_count(10, hidden, 500), 384u + 1056u + 16500u);
}

TEST(Generate, NoTruncationWhenExact) {
  const auto g = make_generator(32, 8, 2, {8}, 1);
  EXPECT_EQ(g.generate_params().omega.size(), 32u);
}

TEST(Generate, TruncatesLastChunk) {
  const auto g = make_generator(10, 4, 2, {8}, 2);
  EXPECT_EQ(g.plan().n_ch, 3);
  EXPECT_EQ(g.plan().generated(), 12);
  EXPECT_EQ(g.generate_params().omega.size(), 10u);
}

TEST(Generate, MatchesStraightLineOracle) {
  // N = 3, n_mlp = 4, m = 30: eight chunks, the last one truncated by two.
  const std::vector<std::size_t> hidden = {5, 6};
  const int layers = 2;
  const auto g = make_generator(30, 4, layers, hidden, 11);
  ASSERT_EQ(g.plan().n_qubits, 3);
  const QtParams& p = g.params();

  const auto u = fqt::testing::ansatz_dense(3, layers, p.theta);
  std::vector<fqt::testing::C> psi(8, 0.0);
  psi[0] = 1.0;
  psi = fqt::testing::apply(u, psi);

  std::vector<double> expect;
  for (int i = 0; i < 8; ++i) {
    std::vector<double> x = {double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1),
                             std::norm(psi[i]) * 8.0};
    std::size_t at = 0;
    const std::size_t widths[] = {4, 5, 6, 4};
    for (int l = 0; l < 3; ++l) {
      const std::size_t in = widths[l];
      const std::size_t out = widths[l + 1];
      std::vector<double> y(out);
      for (std::size_t o = 0; o < out; ++o) {
        double acc = p.beta[at + out * in + o];
        for (std::size_t k = 0; k < in; ++k) acc += p.beta[at + o * in + k] * x[k];
        y[o] = l < 2 ? std::tanh(acc) : acc;
      }
      at += out * in + out;
      x = y;
    }
    ASSERT_EQ(at, p.beta.size());
    expect.insert(expect.end(), x.begin(), x.end());
  }
  expect.resize(30);

  const auto omega = g.generate_params().omega;
  ASSERT_EQ(omega.size(), 30u);
  EXPECT_LE(fqt::testing::max_abs_diff(omega, expect), 1e-12);
}

TEST(Generate, VanillaCaseIsOneWeightPerProbability) {
  // With n_mlp = 1 and no hidden layer, omega_i = a * p_i * 2^N + b.
  const auto plan = plan_chunks(6, 1);
  ASSERT_EQ(plan.n_qubits, 3);
  const AnsatzSpec ansatz{3, 2};
  QtParams p;
  p.theta = uniform_vector(ansatz.param_count(), -3, 3, 21);
  p.beta = {0.0, 0.0, 0.0, 2.5, -0.75};  // three bit weights, the prob weight, bias
  const Generator g(ansatz, plan, {}, p);
  const auto probs = fqt::qsim::probabilities(fqt::qsim::run_ansatz(ansatz, p.theta));
  const auto omega = g.generate_params().omega;
  ASSERT_EQ(omega.size(), 6u);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(omega[i], 2.5 * probs[i] * 8.0 - 0.75, 1e-13);
}

TEST(Generate, DeterministicBitwise) {
  const auto g = make_generator(100, 7, 3, {6, 6}, 4);
  const auto a = g.generate_params().omega;
  const auto b = g.generate_params().omega;
  const auto c = make_generator(100, 7, 3, {6, 6}, 4).generate_params().omega;
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
  EXPECT_EQ(std::memcmp(a.data(), c.data(), a.size() * sizeof(double)), 0);
}

TEST(Generate, InitializationRanges) {
  const auto g = make_generator(200, 10, 4, {16}, 9);
  for (double t : g.params().theta) {
    EXPECT_GE(t, -M_PI);
    EXPECT_LE(t, M_PI);
  }
  // First layer fan-in is N + 1 = 6.
  const double bound = 1.0 / std::sqrt(6.0);
  for (std::size_t i = 0; i < 6 * 16 + 16; ++i) EXPECT_LE(std::abs(g.params().beta[i]), bound);
}

TEST(Generator, RejectsMismatchedShapes) {
  const auto plan = plan_chunks(30, 4);
  const std::vector<std::size_t> hidden = {4};
  QtParams p;
  p.theta.assign(AnsatzSpec{3, 1}.param_count(), 0.0);
  p.beta.assign(fqt::qtgen::mapping_param_count(3, hidden, 4), 0.0);
  EXPECT_NO_THROW(Generator(AnsatzSpec{3, 1}, plan, hidden, p));
  EXPECT_THROW(Generator(AnsatzSpec{4, 1}, plan, hidden, p), fqt::ShapeError);
  QtParams short_beta = p;
  short_beta.beta.pop_back();
  EXPECT_THROW(Generator(AnsatzSpec{3, 1}, plan, hidden, short_beta), fqt::ShapeError);
  QtParams long_theta = p;
  long_theta.theta.push_back(0.0);
  EXPECT_THROW(Generator(AnsatzSpec{3, 1}, plan, hidden, long_theta), fqt::ShapeError);
}

TEST(Backprop, ZeroCotangentGivesZeroGradients) {
  const auto g = make_generator(30, 4, 2, {5}, 3);
  const auto gen = g.generate_params();
  const std::vector<double> zero(30, 0.0);
  const auto grads = g.backprop_generation(zero, gen.tape);
  for (double v : grads.theta) EXPECT_EQ(v, 0.0);
  for (double v : grads.beta) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(grads.theta.size(), g.params().theta.size());
  EXPECT_EQ(grads.beta.size(), g.params().beta.size());
}

TEST(Backprop, MatchesFiniteDifferencesSmall) {
  // N = 2, n_mlp = 2, m = 6: three chunks, basis state 3 unused.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = make_generator(6, 2, 2, {3}, 100 + seed);
    ASSERT_EQ(g.plan().n_qubits, 2);
    const auto w = uniform_vector(6, -1, 1, 200 + seed);
    const auto gen = g.generate_params();
    const auto grads = g.backprop_generation(w, gen.tape);
    const auto fd = finite_difference(
        [&](std::span<const double> flat) { return linear_loss(g, flat, w); }, g.params().flat());
    const std::size_t nt = grads.theta.size();
    EXPECT_LE(relative_error(grads.theta, std::span(fd).first(nt)), 1e-5) << "seed " << seed;
    EXPECT_LE(relative_error(grads.beta, std::span(fd).subspan(nt)), 1e-5) << "seed " << seed;
  }
}

TEST(Backprop, TruncatedTailHasNoEffect) {
  const auto g = make_generator(10, 4, 2, {4}, 31);
  const auto gen = g.generate_params();
  auto w = uniform_vector(10, -1, 1, 32);
  const auto a = g.backprop_generation(w, gen.tape);
  // The same cotangent routed through a plan with m = 12 and zero tail.
  QtParams p = g.params();
  const Generator full(g.ansatz(), plan_chunks(12, 4), g.hidden(), p);
  w.push_back(0.0);
  w.push_back(0.0);
  const auto b = full.backprop_generation(w, full.generate_params().tape);
  EXPECT_LE(fqt::testing::max_abs_diff(a.theta, b.theta), 1e-14);
  EXPECT_LE(fqt::testing::max_abs_diff(a.beta, b.beta), 1e-14);
}

TEST(Backprop, NoStructurallyZeroBetaEntries) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = make_generator(21, 3, 2, {4, 3}, 300 + seed);
    const auto w = uniform_vector(21, -1, 1, 400 + seed);
    const auto grads = g.backprop_generation(w, g.generate_params().tape);
    for (std::size_t i = 0; i < grads.beta.size(); ++i) {
      EXPECT_NE(grads.beta[i], 0.0) << "seed " << seed << " entry " << i;
    }
  }
}

TEST(Backprop, StaleTapeThrows) {
  auto g = make_generator(30, 4, 2, {5}, 7);
  const auto gen = g.generate_params();
  const std::vector<double> w(30, 1.0);
  EXPECT_NO_THROW(g.backprop_generation(w, gen.tape));

  const Generator other = g;
  EXPECT_THROW(other.backprop_generation(w, gen.tape), fqt::InvalidStateError);

  g.set_flat(g.params().flat());
  EXPECT_THROW(g.backprop_generation(w, gen.tape), fqt::InvalidStateError);
}

TEST(Backprop, WrongCotangentLengthThrows) {
  const auto g = make_generator(30, 4, 2, {5}, 7);
  const auto gen = g.generate_params();
  const std::vector<double> w(29, 1.0);
  EXPECT_THROW(g.backprop_generation(w, gen.tape), fqt::ShapeError);
}

TEST(Backprop, EndToEndThroughTargetModel) {
  // Cross-entropy of a small target model whose weights come from the
  // generator: n_mlp = 128 over mlp_tiny(2, 2) gives ten chunks on N = 4.
  const auto target = fqt::nn::mlp_tiny(2, 2);
  const auto plan = plan_chunks(static_cast<std::int64_t>(target.param_count()), 128);
  ASSERT_EQ(plan.n_qubits, 4);
  const auto g = Generator::initialize(AnsatzSpec{4, 2}, plan, {6, 6}, 55);
  fqt::nn::Batch batch;
  batch.inputs = uniform_vector(8, -1, 1, 56);
  batch.labels = {0, 1, 1, 0};

  const auto gen = g.generate_params();
  const auto lg = fqt::nn::loss_and_grad(target, gen.omega, batch);
  const auto grads = g.backprop_generation(lg.d_omega, gen.tape);

  const auto fd = finite_difference(
      [&](std::span<const double> flat) {
        Generator copy = g;
        copy.set_flat(flat);
        const auto omega = copy.generate_params().omega;
        return fqt::nn::softmax_cross_entropy(fqt::nn::forward(target, omega, batch.inputs, 4),
                                              batch.labels, 2);
      },
      g.params().flat());
  const std::size_t nt = grads.theta.size();
  EXPECT_LE(relative_error(grads.theta, std::span(fd).first(nt)), 1e-5);
  EXPECT_LE(relative_error(grads.beta, std::span(fd).subspan(nt)), 1e-5);
}

}  // namespace
