#include "fqt/data/evaluate.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "fqt/errors.hpp"

namespace fqt::data {

ClassifierScore evaluate_classifier(const nn::ModelSpec& spec, std::span<const double> omega,
                                    const Dataset& dataset, std::size_t chunk) {
  if (dataset.size() == 0) throw InvalidArgumentError("cannot evaluate on an empty dataset");
  if (spec.input_shape() != dataset.sample_shape) {
    throw ShapeError("model expects inputs " + nn::to_string(spec.input_shape()) +
                     ", dataset provides " + nn::to_string(dataset.sample_shape));
  }
  const std::size_t n_classes = spec.output_shape()[0];
  ClassifierScore score;
  double loss_sum = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < dataset.size(); begin += chunk) {
    const std::size_t end = std::min(dataset.size(), begin + chunk);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const nn::Batch batch = dataset.gather(idx);
    const auto logits = nn::forward(spec, omega, batch.inputs, batch.size());
    loss_sum += nn::softmax_cross_entropy(logits, batch.labels, n_classes) *
                static_cast<double>(batch.size());
    score.correct += nn::count_correct(logits, batch.labels, n_classes);
  }
  score.loss = loss_sum / static_cast<double>(dataset.size());
  score.accuracy = static_cast<double>(score.correct) / static_cast<double>(dataset.size());
  return score;
}

}  // namespace fqt::data
