#include "fqt/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fqt/errors.hpp"

namespace fqt::data {

void Dataset::validate() const {
  if (labels.empty()) throw InvalidArgumentError("dataset is empty");
  if (n_classes < 1) throw InvalidArgumentError("dataset needs at least one class");
  if (inputs.size() != labels.size() * sample_size()) {
    throw InvalidArgumentError("dataset holds " + std::to_string(inputs.size()) + " values for " +
                               std::to_string(labels.size()) + " samples of shape " +
                               nn::to_string(sample_shape));
  }
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw InvalidArgumentError("label " + std::to_string(y) + " out of range");
  }
  for (double x : inputs) {
    if (!std::isfinite(x)) throw InvalidArgumentError("dataset contains a non-finite input");
  }
}

nn::Batch Dataset::gather(std::span<const std::size_t> indices) const {
  nn::Batch batch;
  const std::size_t width = sample_size();
  batch.inputs.resize(indices.size() * width);
  batch.labels.resize(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= size()) throw IndexError("sample index " + std::to_string(i) + " out of range");
    std::copy_n(inputs.begin() + static_cast<std::ptrdiff_t>(i * width), width,
                batch.inputs.begin() + static_cast<std::ptrdiff_t>(k * width));
    batch.labels[k] = labels[i];
  }
  return batch;
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  nn::Batch b = gather(indices);
  return Dataset{sample_shape, std::move(b.inputs), std::move(b.labels), n_classes, split};
}

TrainTest synthetic_blobs(int n_classes, std::size_t n_per_class, std::size_t input_dim,
                          double separation, std::uint64_t seed) {
  if (n_classes < 2 || input_dim < 1 || n_per_class < 5) {
    throw InvalidArgumentError("synthetic_blobs needs >= 2 classes, >= 5 samples per class and a "
                               "positive input dimension");
  }
  if (static_cast<std::size_t>(n_classes) > input_dim) {
    throw InvalidArgumentError("synthetic_blobs places one class per axis; input_dim " +
                               std::to_string(input_dim) + " < n_classes " +
                               std::to_string(n_classes));
  }
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw InvalidArgumentError("separation must be finite and >= 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double offset = separation / std::sqrt(2.0);
  const std::size_t n_train = (4 * n_per_class) / 5;

  TrainTest out;
  for (Dataset* d : {&out.train, &out.test}) {
    d->sample_shape = {input_dim};
    d->n_classes = n_classes;
  }
  out.test.split = Split::kTest;
  for (int k = 0; k < n_classes; ++k) {
    for (std::size_t j = 0; j < n_per_class; ++j) {
      Dataset& d = j < n_train ? out.train : out.test;
      for (std::size_t c = 0; c < input_dim; ++c) {
        const double mean = c == static_cast<std::size_t>(k) ? offset : 0.0;
        d.inputs.push_back(mean + noise(rng));
      }
      d.labels.push_back(k);
    }
  }
  for (Dataset* d : {&out.train, &out.test}) {
    std::vector<std::size_t> order(d->size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    *d = d->select(order);
  }
  return out;
}

Dataset subsample(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > dataset.size()) {
    throw InvalidArgumentError("cannot subsample " + std::to_string(n) + " of " +
                               std::to_string(dataset.size()) + " samples");
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.n_classes));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
  }

  // Largest-remainder allocation; ties go to the lower class id.
  const std::size_t total = dataset.size();
  std::vector<std::size_t> take(by_class.size());
  std::vector<std::pair<std::size_t, std::size_t>> remainders;  // (remainder, class)
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const std::size_t scaled = n * by_class[c].size();
    take[c] = scaled / total;
    assigned += take[c];
    remainders.emplace_back(scaled % total, c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++take[remainders[r].second];

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto pool = by_class[c];
    std::shuffle(pool.begin(), pool.end(), rng);
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  std::shuffle(chosen.begin(), chosen.end(), rng);
  return dataset.select(chosen);
}

double majority_class_rate(const Dataset& dataset) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(dataset.n_classes), 0);
  for (int y : dataset.labels) ++counts[static_cast<std::size_t>(y)];
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
         static_cast<double>(dataset.size());
}

}  // namespace fqt::data
