#pragma once

#include <cstddef>
#include <string_view>

#include "fqt/nn/model.hpp"

namespace fqt::nn {

/// Small dense classifier for desk-scale runs:
/// dense(in,32) relu dense(32,32) relu dense(32,n_classes).
/// With in = 16 and 3 classes this is 544 + 1056 + 99 = 1699 parameters.
ModelSpec mlp_tiny(std::size_t input_dim, std::size_t n_classes);

/// VGG-style CIFAR-10 network, input (3,32,32):
///
///   conv 3->16 k3 p1 + relu      3*16*9 + 16   =    448
///   conv 16->16 k3 p1 + relu     16*16*9 + 16  =  2 320
///   maxpool 2                                  ->  (16,16,16)
///   conv 16->32 k3 p1 + relu     16*32*9 + 32  =  4 640
///   conv 32->32 k3 p1 + relu     32*32*9 + 32  =  9 248
///   maxpool 2                                  ->  (32,8,8)
///   flatten, dense 2048->128 + relu            = 262 272
///   dense 128->10                              =  1 290
///                                        total = 280 218
ModelSpec vgg_small();

inline constexpr std::size_t kVggSmallParams = 280218;

/// Builds a preset by name ("mlp_tiny" or "vgg_small") for the given
/// per-sample input shape. mlp_tiny flattens image inputs first. Throws
/// InvalidArgumentError for an unknown name or an unsupported shape.
ModelSpec make_preset(std::string_view name, const Shape& input_shape, std::size_t n_classes);

}  // namespace fqt::nn
