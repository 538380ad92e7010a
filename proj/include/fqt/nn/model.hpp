#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fqt::nn {

/// Per-sample tensor shape: {features} for flat data, {channels, height, width}
/// for images.
using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

enum class LayerKind { kDense, kConv2d, kMaxPool2d, kRelu, kTanh, kFlatten };

struct Layer {
  LayerKind kind = LayerKind::kRelu;
  std::size_t in = 0;   // dense inputs or conv input channels
  std::size_t out = 0;  // dense outputs or conv output channels
  bool bias = true;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t pad = 0;

  static Layer dense(std::size_t in, std::size_t out, bool bias = true);
  static Layer conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                      std::size_t stride = 1, std::size_t pad = 0, bool bias = true);
  static Layer maxpool2d(std::size_t kernel);
  static Layer relu();
  static Layer tanh();
  static Layer flatten();
};

/// An ordered stack of layers over a fixed input shape. Construction checks
/// that adjacent shapes compose and throws ShapeError otherwise.
///
/// Parameters are packed layer by layer, weights first and then bias. Dense
/// weights are (out, in) row-major; conv weights are (out_ch, in_ch, k, k).
class ModelSpec {
 public:
  ModelSpec(Shape input_shape, std::vector<Layer> layers);

  const Shape& input_shape() const { return shapes_.front(); }
  const Shape& output_shape() const { return shapes_.back(); }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Shape entering layer l; shape_at(layers().size()) is the output shape.
  const Shape& shape_at(std::size_t l) const { return shapes_[l]; }

  /// First index of layer l's parameters inside the flat vector.
  std::size_t param_offset(std::size_t l) const { return offsets_[l]; }
  std::size_t layer_param_count(std::size_t l) const { return offsets_[l + 1] - offsets_[l]; }
  std::size_t param_count() const { return offsets_.back(); }

 private:
  std::vector<Layer> layers_;
  std::vector<Shape> shapes_;
  std::vector<std::size_t> offsets_;
};

std::size_t param_count(const ModelSpec& spec);

/// One layer's slice of the flat parameter vector.
struct LayerWeights {
  std::vector<double> weights;
  std::vector<double> bias;
};

/// Splits omega into per-layer weights and biases (empty for parameterless
/// layers); pack() is the inverse.
std::vector<LayerWeights> unpack(const ModelSpec& spec, std::span<const double> omega);
std::vector<double> pack(const ModelSpec& spec, const std::vector<LayerWeights>& layers);

/// Activations recorded by forward() for a later backward().
struct Tape {
  std::size_t batch = 0;
  std::vector<std::vector<double>> activations;  // [0] is the input
  std::vector<std::vector<std::uint32_t>> argmax;  // per max-pool layer, else empty
};

/// Runs the model on `batch` samples stored contiguously in `inputs`.
/// Returns batch x numel(output_shape) values. Fills `tape` when given.
std::vector<double> forward(const ModelSpec& spec, std::span<const double> omega,
                            std::span<const double> inputs, std::size_t batch,
                            Tape* tape = nullptr);

struct Gradients {
  std::vector<double> d_omega;
  std::vector<double> d_input;
};

/// Backpropagates d_output (same layout as forward's result) through the
/// recorded tape. Gradients are summed over the batch.
Gradients backward(const ModelSpec& spec, std::span<const double> omega, const Tape& tape,
                   std::span<const double> d_output);

struct Batch {
  std::vector<double> inputs;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> d_omega;
};

/// Mean softmax cross-entropy of `logits` (batch x n_classes) and, when
/// `d_logits` is non-null, its gradient with respect to the logits.
double softmax_cross_entropy(std::span<const double> logits, std::span<const int> labels,
                             std::size_t n_classes, std::vector<double>* d_logits = nullptr);

/// Number of rows whose first maximal logit equals the label.
std::size_t count_correct(std::span<const double> logits, std::span<const int> labels,
                          std::size_t n_classes);

/// Mean cross-entropy over the batch together with its gradient in omega.
LossAndGrad loss_and_grad(const ModelSpec& spec, std::span<const double> omega,
                          const Batch& batch);

}  // namespace fqt::nn
