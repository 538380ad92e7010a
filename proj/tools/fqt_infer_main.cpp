// Standalone inference. Links only the classical model, data and config
// code: no circuit simulation is reachable from this binary.
#include <CLI11.hpp>
#include <iostream>

#include "fqt/cli/infer.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Classical-only inference from FQTW weights"};
  std::string weights;
  std::string config_path;
  std::string split = "test";
  app.add_option("weights", weights, "FQTW weights")->required();
  app.add_option("config", config_path, "Run config naming model and data")->required();
  app.add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto which = split == "train" ? fqt::data::Split::kTrain : fqt::data::Split::kTest;
    fqt::cli::print_infer(std::cout,
                          fqt::cli::infer(weights, fqt::cli::load_config(config_path), which));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
