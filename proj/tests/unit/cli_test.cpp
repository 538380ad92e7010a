#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "fqt/cli/commands.hpp"
#include "fqt/cli/config.hpp"
#include "fqt/cli/infer.hpp"
#include "fqt/errors.hpp"
#include "fqt/nn/presets.hpp"
#include "fqt/nn/weights_io.hpp"

namespace {

namespace fs = std::filesystem;
using fqt::cli::parse_config;
using fqt::cli::RunConfig;

const std::string kFqt = FQT_BIN;
const std::string kFqtInfer = FQT_INFER_BIN;
const fs::path kConfigDir = FQT_CONFIG_DIR;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fqt_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

Outcome run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

// The desk preset shortened to a few rounds, writing into `dir`/run.
fs::path short_desk_config(const fs::path& dir, int rounds) {
  RunConfig c = fqt::cli::load_config(kConfigDir / "desk_blobs.ini");
  c.rounds = rounds;
  c.output_dir = (dir / "run").string();
  const fs::path path = dir / "desk.ini";
  spit(path, fqt::cli::to_ini(c));
  return path;
}

std::string last_global_test_acc(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, last;
  while (std::getline(in, line)) {
    if (line.find(",GLOBAL,") != std::string::npos) last = line;
  }
  return last.substr(last.rfind(',') + 1);
}

std::string infer_accuracy(const std::string& out) {
  const auto at = out.find("accuracy ");
  if (at == std::string::npos) return {};
  return out.substr(at + 9, out.find('\n', at) - at - 9);
}

void expect_parse_error(const std::string& text, const std::string& needle) {
  try {
    parse_config(text, "t.ini");
    ADD_FAILURE() << "no error for:\n" << text;
  } catch (const fqt::InvalidArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(Config, DefaultsWhenEmpty) {
  const RunConfig c = parse_config("# nothing\n\n");
  EXPECT_EQ(c.model_preset, "mlp_tiny");
  EXPECT_EQ(c.ansatz_layers, 5);
  EXPECT_EQ(c.hidden, (std::vector<std::size_t>{32, 32}));
  EXPECT_EQ(c.learning_rate, 1e-3);
}

TEST(Config, ParsesSectionsAndLists) {
  const RunConfig c = parse_config(
      "[generator]\n n_mlp = 8 \nhidden=4, 5,6\n; comment\n[federated]\nlearning_rate = 0.25\n"
      "aggregation = size_weighted\n[data]\nseparation = 6.5\n");
  EXPECT_EQ(c.n_mlp, 8);
  EXPECT_EQ(c.hidden, (std::vector<std::size_t>{4, 5, 6}));
  EXPECT_EQ(c.learning_rate, 0.25);
  EXPECT_EQ(c.aggregation, "size_weighted");
  EXPECT_EQ(c.blob_separation, 6.5);
}

TEST(Config, RejectsMalformedInput) {
  expect_parse_error("[run]\nseed = 1\nfoo = 2\n", "t.ini:3");
  expect_parse_error("[run]\nseed = 1\nseed = 2\n", "t.ini:3");
  expect_parse_error("[nowhere]\nseed = 1\n", "t.ini:1");
  expect_parse_error("seed = 1\n", "t.ini:1");
  expect_parse_error("[run]\nseed 1\n", "t.ini:2");
  expect_parse_error("[federated]\nrounds = many\n", "t.ini:2");
  expect_parse_error("[generator]\nhidden = 4,x\n", "t.ini:2");
  expect_parse_error("[federated]\nlearning_rate = 0.1abc\n", "t.ini:2");
}

TEST(Config, CrossFieldValidation) {
  EXPECT_THROW(parse_config("[federated]\nrounds = 0\n").validate(), fqt::InvalidArgumentError);
  EXPECT_THROW(parse_config("[model]\npreset = resnet\n").validate(), fqt::InvalidArgumentError);
  EXPECT_THROW(parse_config("[data]\nsource = cifar10\n").validate(), fqt::InvalidArgumentError);
  EXPECT_THROW(parse_config("[federated]\naggregation = median\n").validate(),
               fqt::InvalidArgumentError);
  EXPECT_THROW(parse_config("[generator]\nn_mlp = 0\n").validate(), fqt::InvalidArgumentError);
}

TEST(Config, ToIniRoundTrips) {
  RunConfig c = parse_config("[federated]\nlearning_rate = 0.1\n[data]\nseparation = 0.3\n");
  c.hidden = {7};
  const std::string once = fqt::cli::to_ini(c);
  const RunConfig back = parse_config(once);
  EXPECT_EQ(fqt::cli::to_ini(back), once);
  EXPECT_EQ(back.learning_rate, 0.1);
  EXPECT_EQ(back.blob_separation, 0.3);
  EXPECT_EQ(back.hidden, c.hidden);
}

TEST(Config, ToIniRoundTripsCifarFields) {
  RunConfig c = parse_config("[model]\npreset = vgg_small\n[data]\nsource = cifar10\ncifar_dir = /x\n");
  c.norm_mean = std::array<double, 3>{0.49139968, 0.48215841, 0.44653091};
  c.norm_std = std::array<double, 3>{0.24703223, 0.24348513, 0.26158784};
  c.cifar_train_subset = 1000;
  const std::string once = fqt::cli::to_ini(c);
  const RunConfig back = parse_config(once);
  EXPECT_EQ(fqt::cli::to_ini(back), once);
  EXPECT_EQ(back.norm_mean, c.norm_mean);
  EXPECT_EQ(back.norm_std, c.norm_std);
  EXPECT_EQ(back.cifar_train_subset, 1000u);
  EXPECT_EQ(back.cifar_dir, "/x");
}

TEST(Config, ShippedPresetsParseAndValidate) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(kConfigDir)) {
    if (entry.path().extension() != ".ini") continue;
    const RunConfig c = fqt::cli::load_config(entry.path());
    EXPECT_NO_THROW(c.validate()) << entry.path();
    const auto setup = fqt::cli::make_setup(c);
    const auto m = static_cast<std::size_t>(setup.plan.m);
    const std::size_t trainable = setup.ansatz.param_count() +
                                  fqt::qtgen::mapping_param_count(setup.plan.n_qubits, setup.hidden,
                                                                  setup.plan.n_mlp);
    EXPECT_LT(trainable, m) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 4);
}

TEST(Plan, TargetCnnReports) {
  const std::vector<std::size_t> hidden = {32, 32};
  EXPECT_EQ(fqt::cli::make_plan_report(285226, 2000, hidden, 5).plan.n_qubits, 8);
  const auto r = fqt::cli::make_plan_report(285226, 500, hidden, 5);
  EXPECT_EQ(r.plan.n_qubits, 10);
  EXPECT_EQ(r.theta_count, 285u);
  EXPECT_EQ(r.trainable(), r.theta_count + r.beta_count);
}

TEST(Plan, VanillaMode) {
  const std::vector<std::size_t> none;
  const auto r = fqt::cli::make_plan_report(16, 1, none, 1);
  EXPECT_EQ(r.plan.n_qubits, 4);
  EXPECT_EQ(r.theta_count, 21u);
  std::ostringstream text;
  fqt::cli::print_plan(text, r, false);
  EXPECT_NE(text.str().find("vanilla"), std::string::npos);
}

TEST(Plan, BinaryJsonAndErrors) {
  const fs::path dir = scratch("plan");
  const auto ok = run(kFqt + " plan -m 285226 -n 500 -L 5 --json", dir);
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("\"n_qubits\": 10"), std::string::npos) << ok.out;
  EXPECT_NE(ok.out.find("\"theta\": 285"), std::string::npos) << ok.out;

  const auto bad = run(kFqt + " plan -m 0 -n 500", dir);
  EXPECT_EQ(bad.code, 2);
  EXPECT_FALSE(bad.err.empty());

  const auto usage = run(kFqt + " plan -n 500", dir);
  EXPECT_EQ(usage.code, 1);
  const auto no_cmd = run(kFqt, dir);
  EXPECT_EQ(no_cmd.code, 1);
}

TEST(Checkpoint, RoundTripAndCorruption) {
  const fqt::qtgen::QtParams p{{0.5, -0.25, 3.0}, {1e-300, -7.0}};
  const auto bytes = fqt::cli::encode_checkpoint(p);
  const auto back = fqt::cli::decode_checkpoint(bytes);
  EXPECT_EQ(back.theta, p.theta);
  EXPECT_EQ(back.beta, p.beta);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(fqt::cli::decode_checkpoint(truncated), fqt::ShapeError);
  auto extended = bytes;
  extended.insert(extended.end(), 8, 0);
  EXPECT_THROW(fqt::cli::decode_checkpoint(extended), fqt::ShapeError);
  auto bad_magic = bytes;
  bad_magic[1] = 'X';
  EXPECT_THROW(fqt::cli::decode_checkpoint(bad_magic), fqt::ShapeError);
}

TEST(Train, MalformedConfigWritesNothing) {
  const fs::path dir = scratch("malformed");
  spit(dir / "bad.ini", "[run]\noutput_dir = " + (dir / "out").string() + "\n[federated]\nrounds = -2\n");
  const auto r = run(kFqt + " train " + (dir / "bad.ini").string(), dir);
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
  EXPECT_FALSE(fs::exists(dir / "out"));

  spit(dir / "garbled.ini", "[run]\noutput_dir = " + (dir / "out").string() + "\nthis is not ini\n");
  EXPECT_NE(run(kFqt + " train " + (dir / "garbled.ini").string(), dir).code, 0);
  EXPECT_FALSE(fs::exists(dir / "out"));

  EXPECT_NE(run(kFqt + " train " + (dir / "missing.ini").string(), dir).code, 0);
}

class TrainedRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = scratch("trained");
    config_ = short_desk_config(dir_, 4);
    const auto r = run(kFqt + " train " + config_.string(), dir_);
    ASSERT_EQ(r.code, 0) << r.err;
    csv_ = slurp(dir_ / "run" / "metrics.csv");
  }

  static inline fs::path dir_;
  static inline fs::path config_;
  static inline std::string csv_;
};

TEST_F(TrainedRun, WritesExpectedOutputs) {
  const fs::path out = dir_ / "run";
  EXPECT_TRUE(fs::exists(out / "config.resolved.ini"));
  EXPECT_TRUE(fs::exists(out / "weights.fqtw"));
  EXPECT_FALSE(fs::exists(out / "INCOMPLETE"));
  for (int r = 1; r <= 4; ++r) {
    char name[32];
    std::snprintf(name, sizeof(name), "round_%04d.fqtc", r);
    EXPECT_TRUE(fs::exists(out / "checkpoints" / name)) << name;
  }
  std::istringstream in(csv_);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "round,client_id,train_loss,train_acc,test_acc");
  int global = 0, client = 0;
  while (std::getline(in, line)) (line.find(",GLOBAL,") != std::string::npos ? global : client)++;
  EXPECT_EQ(global, 4);
  EXPECT_EQ(client, 16);
}

TEST_F(TrainedRun, RerunIsByteIdentical) {
  const fs::path again = scratch("trained_again");
  RunConfig c = fqt::cli::load_config(config_);
  c.output_dir = (again / "run").string();
  spit(again / "desk.ini", fqt::cli::to_ini(c));
  ASSERT_EQ(run(kFqt + " train " + (again / "desk.ini").string(), again).code, 0);
  EXPECT_EQ(slurp(again / "run" / "metrics.csv"), csv_);
  EXPECT_EQ(slurp(again / "run" / "weights.fqtw"), slurp(dir_ / "run" / "weights.fqtw"));
}

TEST_F(TrainedRun, ResolvedConfigReproducesRun) {
  const fs::path out = dir_ / "run";
  const std::string weights = slurp(out / "weights.fqtw");
  ASSERT_EQ(run(kFqt + " train " + (out / "config.resolved.ini").string(), dir_).code, 0);
  EXPECT_EQ(slurp(out / "metrics.csv"), csv_);
  EXPECT_EQ(slurp(out / "weights.fqtw"), weights);
}

TEST_F(TrainedRun, GenIsDeterministicAndMatchesExport) {
  const fs::path ckpt = dir_ / "run" / "checkpoints" / "round_0004.fqtc";
  const std::string a = (dir_ / "gen_a.fqtw").string();
  const std::string b = (dir_ / "gen_b.fqtw").string();
  ASSERT_EQ(run(kFqt + " gen " + config_.string() + " " + ckpt.string() + " -o " + a, dir_).code, 0);
  ASSERT_EQ(run(kFqt + " gen " + config_.string() + " " + ckpt.string() + " -o " + b, dir_).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a), slurp(dir_ / "run" / "weights.fqtw"));
}

TEST_F(TrainedRun, GenRejectsCorruptCheckpoint) {
  const fs::path ckpt = dir_ / "run" / "checkpoints" / "round_0001.fqtc";
  std::string bytes = slurp(ckpt);
  bytes.resize(bytes.size() - 8);
  spit(dir_ / "short.fqtc", bytes);
  const auto r = run(kFqt + " gen " + config_.string() + " " + (dir_ / "short.fqtc").string() +
                         " -o " + (dir_ / "never.fqtw").string(),
                     dir_);
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(dir_ / "never.fqtw"));

  // A well-formed checkpoint for different shapes.
  fqt::cli::write_checkpoint(dir_ / "other.fqtc", {{0.0, 1.0}, {2.0}});
  RunConfig c = fqt::cli::load_config(config_);
  EXPECT_THROW(fqt::cli::generate(c, dir_ / "other.fqtc", dir_ / "never.fqtw"), fqt::ShapeError);
}

TEST_F(TrainedRun, InferReproducesRecordedAccuracy) {
  const std::string weights = (dir_ / "run" / "weights.fqtw").string();
  const std::string recorded = last_global_test_acc(csv_);
  const auto a = run(kFqtInfer + " " + weights + " " + config_.string(), dir_);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(infer_accuracy(a.out), recorded);
  const auto b = run(kFqt + " infer " + weights + " " + config_.string() + " --split test", dir_);
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(infer_accuracy(b.out), recorded);
}

TEST(Infer, WrongParameterCountIsFormatError) {
  const fs::path dir = scratch("wrong_m");
  const fs::path config = short_desk_config(dir, 1);
  fqt::nn::write_fqtw(dir / "w.fqtw", std::vector<double>(10, 0.0));
  const auto r = run(kFqtInfer + " " + (dir / "w.fqtw").string() + " " + config.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("1699"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("10"), std::string::npos) << r.err;
  EXPECT_THROW(fqt::cli::infer(dir / "w.fqtw", fqt::cli::load_config(config), fqt::data::Split::kTest),
               fqt::FormatError);
}

TEST(Infer, ZeroWeightsGiveMajorityRate) {
  const fs::path dir = scratch("zeros");
  RunConfig c = fqt::cli::load_config(kConfigDir / "desk_blobs.ini");
  c.blob_per_class = 7;  // 5 train and 2 test per class
  c.blob_classes = 3;
  spit(dir / "c.ini", fqt::cli::to_ini(c));
  fqt::nn::write_fqtw(dir / "zeros.fqtw",
                      std::vector<double>(fqt::nn::mlp_tiny(16, 3).param_count(), 0.0));
  RunConfig loaded = fqt::cli::load_config(dir / "c.ini");
  const auto data = fqt::cli::load_data(loaded);
  for (auto split : {fqt::data::Split::kTest, fqt::data::Split::kTrain}) {
    const auto r = fqt::cli::infer(dir / "zeros.fqtw", loaded, split);
    const auto& ds = split == fqt::data::Split::kTest ? data.test : data.train;
    EXPECT_DOUBLE_EQ(r.accuracy, fqt::data::majority_class_rate(ds));
    EXPECT_NEAR(r.loss, std::log(3.0), 1e-12);
  }
}

TEST(Infer, UsageErrors) {
  const fs::path dir = scratch("infer_usage");
  EXPECT_EQ(run(kFqtInfer, dir).code, 1);
  EXPECT_EQ(run(kFqt + " infer a.fqtw c.ini --split validation", dir).code, 1);
  EXPECT_EQ(run(kFqtInfer + " " + (dir / "nope.fqtw").string() + " " +
                    (kConfigDir / "desk_blobs.ini").string(),
                dir)
                .code,
            2);
}

}  // namespace
