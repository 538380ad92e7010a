// fqt: plan, train and generate Quantum-Train weights; `fqt infer` is the
// same classical-only path as the standalone fqt-infer binary.
#include <CLI11.hpp>
#include <iostream>

#include "fqt/cli/commands.hpp"
#include "fqt/cli/infer.hpp"

namespace {

constexpr int kExitRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated Quantum-Train simulator"};
  app.require_subcommand(1);

  auto* plan = app.add_subcommand("plan", "Qubit and parameter budget for a target size");
  std::int64_t m = 0;
  std::int64_t n_mlp = 1;
  std::vector<std::size_t> hidden{32, 32};
  int layers = 5;
  bool json = false;
  plan->add_option("-m,--params", m, "Target-model parameter count")->required();
  plan->add_option("-n,--n-mlp", n_mlp, "Weights generated per basis state")->required();
  plan->add_option("--hidden", hidden, "Mapping-model hidden widths")->delimiter(',');
  plan->add_option("-L,--layers", layers, "Ansatz repetitions");
  plan->add_flag("--json", json, "Machine-readable output");

  auto* train = app.add_subcommand("train", "Run federated training from a config file");
  std::string config_path;
  train->add_option("config", config_path, "Run config (.ini)")->required();

  auto* gen = app.add_subcommand("gen", "Generate target weights from a checkpoint");
  std::string checkpoint;
  std::string out_path = "weights.fqtw";
  gen->add_option("config", config_path, "Run config (.ini)")->required();
  gen->add_option("checkpoint", checkpoint, "FQTC checkpoint")->required();
  gen->add_option("-o,--out", out_path, "Output FQTW file");

  auto* infer = app.add_subcommand("infer", "Classical-only inference from FQTW weights");
  std::string weights;
  std::string split = "test";
  infer->add_option("weights", weights, "FQTW weights")->required();
  infer->add_option("config", config_path, "Run config naming model and data")->required();
  infer->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*plan) {
      fqt::cli::print_plan(std::cout, fqt::cli::make_plan_report(m, n_mlp, hidden, layers), json);
    } else if (*train) {
      fqt::cli::train(fqt::cli::load_config(config_path), std::cout);
    } else if (*gen) {
      fqt::cli::generate(fqt::cli::load_config(config_path), checkpoint, out_path);
    } else if (*infer) {
      const auto which = split == "train" ? fqt::data::Split::kTrain : fqt::data::Split::kTest;
      fqt::cli::print_infer(std::cout,
                            fqt::cli::infer(weights, fqt::cli::load_config(config_path), which));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
