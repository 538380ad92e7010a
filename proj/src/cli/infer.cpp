#include "fqt/cli/infer.hpp"

#include <cstdio>

#include "fqt/data/evaluate.hpp"
#include "fqt/errors.hpp"
#include "fqt/nn/weights_io.hpp"

namespace fqt::cli {

InferResult infer(const std::filesystem::path& weights, RunConfig config, data::Split split) {
  const nn::ModelSpec target = make_target(config);
  const std::vector<double> omega = nn::read_fqtw(weights);
  if (omega.size() != target.param_count()) {
    throw FormatError(weights.string() + ": model '" + config.model_preset + "' expects m = " +
                      std::to_string(target.param_count()) + " weights, file holds " +
                      std::to_string(omega.size()));
  }
  const data::TrainTest data = load_data(config);
  const data::Dataset& ds = split == data::Split::kTest ? data.test : data.train;
  const auto score = data::evaluate_classifier(target, omega, ds);
  return {score.accuracy, score.loss, ds.size()};
}

void print_infer(std::ostream& out, const InferResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", r.accuracy);
  out << "accuracy " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", r.loss);
  out << "loss " << buf << "\n";
  out << "samples " << r.samples << "\n";
}

}  // namespace fqt::cli
