#include "fqt/nn/presets.hpp"

#include <string>

#include "fqt/errors.hpp"

namespace fqt::nn {

ModelSpec mlp_tiny(std::size_t input_dim, std::size_t n_classes) {
  return ModelSpec({input_dim}, {Layer::dense(input_dim, 32), Layer::relu(), Layer::dense(32, 32),
                                 Layer::relu(), Layer::dense(32, n_classes)});
}

ModelSpec vgg_small() {
  return ModelSpec({3, 32, 32}, {
                                    Layer::conv2d(3, 16, 3, 1, 1),
                                    Layer::relu(),
                                    Layer::conv2d(16, 16, 3, 1, 1),
                                    Layer::relu(),
                                    Layer::maxpool2d(2),
                                    Layer::conv2d(16, 32, 3, 1, 1),
                                    Layer::relu(),
                                    Layer::conv2d(32, 32, 3, 1, 1),
                                    Layer::relu(),
                                    Layer::maxpool2d(2),
                                    Layer::flatten(),
                                    Layer::dense(2048, 128),
                                    Layer::relu(),
                                    Layer::dense(128, 10),
                                });
}

ModelSpec make_preset(std::string_view name, const Shape& input_shape, std::size_t n_classes) {
  if (name == "mlp_tiny") {
    if (input_shape.size() == 1) return mlp_tiny(input_shape[0], n_classes);
    const std::size_t flat = numel(input_shape);
    return ModelSpec(input_shape, {Layer::flatten(), Layer::dense(flat, 32), Layer::relu(),
                                   Layer::dense(32, 32), Layer::relu(), Layer::dense(32, n_classes)});
  }
  if (name == "vgg_small") {
    if (n_classes != 10 || input_shape != Shape{3, 32, 32}) {
      throw InvalidArgumentError("vgg_small expects (3,32,32) inputs and 10 classes");
    }
    return vgg_small();
  }
  throw InvalidArgumentError("unknown model preset '" + std::string(name) + "'");
}

}  // namespace fqt::nn
