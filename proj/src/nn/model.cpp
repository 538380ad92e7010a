#include "fqt/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fqt/errors.hpp"

namespace fqt::nn {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

Layer Layer::dense(std::size_t in, std::size_t out, bool bias) {
  return {LayerKind::kDense, in, out, bias};
}

Layer Layer::conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride,
                    std::size_t pad, bool bias) {
  return {LayerKind::kConv2d, in_ch, out_ch, bias, kernel, stride, pad};
}

Layer Layer::maxpool2d(std::size_t kernel) {
  Layer l{LayerKind::kMaxPool2d};
  l.kernel = kernel;
  l.stride = kernel;
  return l;
}

Layer Layer::relu() { return {LayerKind::kRelu}; }
Layer Layer::tanh() { return {LayerKind::kTanh}; }
Layer Layer::flatten() { return {LayerKind::kFlatten}; }

namespace {

std::size_t params_of(const Layer& l) {
  switch (l.kind) {
    case LayerKind::kDense:
      return l.in * l.out + (l.bias ? l.out : 0);
    case LayerKind::kConv2d:
      return l.out * l.in * l.kernel * l.kernel + (l.bias ? l.out : 0);
    default:
      return 0;
  }
}

Shape output_shape_of(const Layer& l, const Shape& in, std::size_t index) {
  auto fail = [&](const std::string& why) {
    return ShapeError("layer " + std::to_string(index) + ": " + why + " (input shape " +
                      to_string(in) + ")");
  };
  switch (l.kind) {
    case LayerKind::kDense:
      if (in.size() != 1 || in[0] != l.in) throw fail("dense expects a flat input of " + std::to_string(l.in));
      if (l.out == 0) throw fail("dense needs at least one output");
      return {l.out};
    case LayerKind::kConv2d: {
      if (in.size() != 3 || in[0] != l.in) throw fail("conv2d expects (" + std::to_string(l.in) + ",H,W)");
      if (l.kernel == 0 || l.stride == 0 || l.out == 0) throw fail("conv2d needs kernel, stride, channels > 0");
      if (in[1] + 2 * l.pad < l.kernel || in[2] + 2 * l.pad < l.kernel) throw fail("kernel larger than padded input");
      return {l.out, (in[1] + 2 * l.pad - l.kernel) / l.stride + 1,
              (in[2] + 2 * l.pad - l.kernel) / l.stride + 1};
    }
    case LayerKind::kMaxPool2d:
      if (in.size() != 3) throw fail("maxpool2d expects (C,H,W)");
      if (l.kernel == 0 || in[1] < l.kernel || in[2] < l.kernel) throw fail("bad pooling window");
      return {in[0], in[1] / l.kernel, in[2] / l.kernel};
    case LayerKind::kRelu:
    case LayerKind::kTanh:
      return in;
    case LayerKind::kFlatten:
      return {numel(in)};
  }
  throw fail("unknown layer kind");
}

void dense_forward(const Layer& l, const double* w, const double* x, double* y, std::size_t batch) {
  const double* b = l.bias ? w + l.in * l.out : nullptr;
  for (std::size_t s = 0; s < batch; ++s) {
    const double* xs = x + s * l.in;
    double* ys = y + s * l.out;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* row = w + o * l.in;
      double acc = b ? b[o] : 0.0;
      for (std::size_t i = 0; i < l.in; ++i) acc += row[i] * xs[i];
      ys[o] = acc;
    }
  }
}

void dense_backward(const Layer& l, const double* w, const double* x, const double* dy, double* dw,
                    double* dx, std::size_t batch) {
  double* db = l.bias ? dw + l.in * l.out : nullptr;
  for (std::size_t s = 0; s < batch; ++s) {
    const double* xs = x + s * l.in;
    const double* dys = dy + s * l.out;
    double* dxs = dx + s * l.in;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double g = dys[o];
      if (db) db[o] += g;
      const double* row = w + o * l.in;
      double* drow = dw + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) {
        drow[i] += g * xs[i];
        dxs[i] += g * row[i];
      }
    }
  }
}

struct ConvGeom {
  std::size_t cin, hin, win, cout, hout, wout, k, stride, pad;
};

ConvGeom conv_geom(const Layer& l, const Shape& in, const Shape& out) {
  return {in[0], in[1], in[2], out[0], out[1], out[2], l.kernel, l.stride, l.pad};
}

void conv_forward(const Layer& l, const ConvGeom& g, const double* w, const double* x, double* y,
                  std::size_t batch) {
  const double* b = l.bias ? w + g.cout * g.cin * g.k * g.k : nullptr;
  const std::size_t in_size = g.cin * g.hin * g.win;
  const std::size_t out_size = g.cout * g.hout * g.wout;
  for (std::size_t s = 0; s < batch; ++s) {
    const double* xs = x + s * in_size;
    double* ys = y + s * out_size;
    for (std::size_t o = 0; o < g.cout; ++o) {
      double* plane = ys + o * g.hout * g.wout;
      std::fill(plane, plane + g.hout * g.wout, b ? b[o] : 0.0);
      for (std::size_t c = 0; c < g.cin; ++c) {
        const double* xc = xs + c * g.hin * g.win;
        const double* kw = w + (o * g.cin + c) * g.k * g.k;
        for (std::size_t oy = 0; oy < g.hout; ++oy) {
          for (std::size_t ox = 0; ox < g.wout; ++ox) {
            double acc = 0.0;
            for (std::size_t ky = 0; ky < g.k; ++ky) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                        static_cast<std::ptrdiff_t>(g.pad);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.hin)) continue;
              for (std::size_t kx = 0; kx < g.k; ++kx) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                          static_cast<std::ptrdiff_t>(g.pad);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.win)) continue;
                acc += kw[ky * g.k + kx] * xc[iy * g.win + ix];
              }
            }
            plane[oy * g.wout + ox] += acc;
          }
        }
      }
    }
  }
}

void conv_backward(const Layer& l, const ConvGeom& g, const double* w, const double* x,
                   const double* dy, double* dw, double* dx, std::size_t batch) {
  double* db = l.bias ? dw + g.cout * g.cin * g.k * g.k : nullptr;
  const std::size_t in_size = g.cin * g.hin * g.win;
  const std::size_t out_size = g.cout * g.hout * g.wout;
  for (std::size_t s = 0; s < batch; ++s) {
    const double* xs = x + s * in_size;
    const double* dys = dy + s * out_size;
    double* dxs = dx + s * in_size;
    for (std::size_t o = 0; o < g.cout; ++o) {
      const double* dplane = dys + o * g.hout * g.wout;
      if (db) {
        for (std::size_t p = 0; p < g.hout * g.wout; ++p) db[o] += dplane[p];
      }
      for (std::size_t c = 0; c < g.cin; ++c) {
        const double* xc = xs + c * g.hin * g.win;
        double* dxc = dxs + c * g.hin * g.win;
        const double* kw = w + (o * g.cin + c) * g.k * g.k;
        double* dkw = dw + (o * g.cin + c) * g.k * g.k;
        for (std::size_t oy = 0; oy < g.hout; ++oy) {
          for (std::size_t ox = 0; ox < g.wout; ++ox) {
            const double gout = dplane[oy * g.wout + ox];
            if (gout == 0.0) continue;
            for (std::size_t ky = 0; ky < g.k; ++ky) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                        static_cast<std::ptrdiff_t>(g.pad);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.hin)) continue;
              for (std::size_t kx = 0; kx < g.k; ++kx) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                          static_cast<std::ptrdiff_t>(g.pad);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.win)) continue;
                dkw[ky * g.k + kx] += gout * xc[iy * g.win + ix];
                dxc[iy * g.win + ix] += gout * kw[ky * g.k + kx];
              }
            }
          }
        }
      }
    }
  }
}

void maxpool_forward(const Layer& l, const Shape& in, const Shape& out, const double* x, double* y,
                     std::uint32_t* arg, std::size_t batch) {
  const std::size_t c = in[0], hin = in[1], win = in[2], hout = out[1], wout = out[2];
  for (std::size_t s = 0; s < batch; ++s) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t in_base = (s * c + ch) * hin * win;
      const std::size_t out_base = (s * c + ch) * hout * wout;
      for (std::size_t oy = 0; oy < hout; ++oy) {
        for (std::size_t ox = 0; ox < wout; ++ox) {
          std::size_t best = in_base + (oy * l.kernel) * win + ox * l.kernel;
          for (std::size_t ky = 0; ky < l.kernel; ++ky) {
            for (std::size_t kx = 0; kx < l.kernel; ++kx) {
              const std::size_t idx = in_base + (oy * l.kernel + ky) * win + ox * l.kernel + kx;
              if (x[idx] > x[best]) best = idx;
            }
          }
          y[out_base + oy * wout + ox] = x[best];
          arg[out_base + oy * wout + ox] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
}

void check_omega(const ModelSpec& spec, std::span<const double> omega) {
  if (omega.size() != spec.param_count()) {
    throw ShapeError("weight vector has " + std::to_string(omega.size()) +
                     " entries, model needs " + std::to_string(spec.param_count()));
  }
}

}  // namespace

ModelSpec::ModelSpec(Shape input_shape, std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (input_shape.empty() || numel(input_shape) == 0) {
    throw ShapeError("model input shape must be non-empty");
  }
  shapes_.push_back(std::move(input_shape));
  offsets_.push_back(0);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    shapes_.push_back(output_shape_of(layers_[l], shapes_.back(), l));
    offsets_.push_back(offsets_.back() + params_of(layers_[l]));
  }
}

std::size_t param_count(const ModelSpec& spec) { return spec.param_count(); }

std::vector<LayerWeights> unpack(const ModelSpec& spec, std::span<const double> omega) {
  check_omega(spec, omega);
  std::vector<LayerWeights> out(spec.layers().size());
  for (std::size_t l = 0; l < out.size(); ++l) {
    const Layer& layer = spec.layers()[l];
    const std::size_t n_bias = layer.bias && params_of(layer) > 0 ? layer.out : 0;
    const auto slice = omega.subspan(spec.param_offset(l), spec.layer_param_count(l));
    out[l].weights.assign(slice.begin(), slice.end() - static_cast<std::ptrdiff_t>(n_bias));
    out[l].bias.assign(slice.end() - static_cast<std::ptrdiff_t>(n_bias), slice.end());
  }
  return out;
}

std::vector<double> pack(const ModelSpec& spec, const std::vector<LayerWeights>& layers) {
  if (layers.size() != spec.layers().size()) throw ShapeError("layer count mismatch in pack");
  std::vector<double> omega;
  omega.reserve(spec.param_count());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weights.size() + layers[l].bias.size() != spec.layer_param_count(l)) {
      throw ShapeError("layer " + std::to_string(l) + " has the wrong number of parameters");
    }
    omega.insert(omega.end(), layers[l].weights.begin(), layers[l].weights.end());
    omega.insert(omega.end(), layers[l].bias.begin(), layers[l].bias.end());
  }
  return omega;
}

std::vector<double> forward(const ModelSpec& spec, std::span<const double> omega,
                            std::span<const double> inputs, std::size_t batch, Tape* tape) {
  check_omega(spec, omega);
  if (inputs.size() != batch * numel(spec.input_shape())) {
    throw ShapeError("input has " + std::to_string(inputs.size()) + " values, expected " +
                     std::to_string(batch) + " x " + to_string(spec.input_shape()));
  }
  const auto& layers = spec.layers();
  std::vector<double> current(inputs.begin(), inputs.end());
  if (tape) {
    tape->batch = batch;
    tape->activations.clear();
    tape->argmax.assign(layers.size(), {});
  }
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const Layer& l = layers[li];
    const Shape& in = spec.shape_at(li);
    const Shape& out = spec.shape_at(li + 1);
    const double* w = omega.data() + spec.param_offset(li);
    std::vector<double> next(batch * numel(out));
    switch (l.kind) {
      case LayerKind::kDense:
        dense_forward(l, w, current.data(), next.data(), batch);
        break;
      case LayerKind::kConv2d:
        conv_forward(l, conv_geom(l, in, out), w, current.data(), next.data(), batch);
        break;
      case LayerKind::kMaxPool2d: {
        std::vector<std::uint32_t> arg(next.size());
        maxpool_forward(l, in, out, current.data(), next.data(), arg.data(), batch);
        if (tape) tape->argmax[li] = std::move(arg);
        break;
      }
      case LayerKind::kRelu:
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = current[i] > 0.0 ? current[i] : 0.0;
        break;
      case LayerKind::kTanh:
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::tanh(current[i]);
        break;
      case LayerKind::kFlatten:
        next = current;
        break;
    }
    if (tape) tape->activations.push_back(std::move(current));
    current = std::move(next);
  }
  if (tape) tape->activations.push_back(current);
  return current;
}

Gradients backward(const ModelSpec& spec, std::span<const double> omega, const Tape& tape,
                   std::span<const double> d_output) {
  check_omega(spec, omega);
  const auto& layers = spec.layers();
  const std::size_t batch = tape.batch;
  if (tape.activations.size() != layers.size() + 1) {
    throw InvalidStateError("tape does not match model depth");
  }
  if (d_output.size() != batch * numel(spec.output_shape())) {
    throw ShapeError("output gradient has " + std::to_string(d_output.size()) +
                     " values, expected " + std::to_string(batch * numel(spec.output_shape())));
  }
  Gradients g;
  g.d_omega.assign(spec.param_count(), 0.0);
  std::vector<double> grad(d_output.begin(), d_output.end());
  for (std::size_t li = layers.size(); li-- > 0;) {
    const Layer& l = layers[li];
    const Shape& in = spec.shape_at(li);
    const Shape& out = spec.shape_at(li + 1);
    const auto& x = tape.activations[li];
    const auto& y = tape.activations[li + 1];
    const double* w = omega.data() + spec.param_offset(li);
    double* dw = g.d_omega.data() + spec.param_offset(li);
    std::vector<double> dx(batch * numel(in), 0.0);
    switch (l.kind) {
      case LayerKind::kDense:
        dense_backward(l, w, x.data(), grad.data(), dw, dx.data(), batch);
        break;
      case LayerKind::kConv2d:
        conv_backward(l, conv_geom(l, in, out), w, x.data(), grad.data(), dw, dx.data(), batch);
        break;
      case LayerKind::kMaxPool2d: {
        const auto& arg = tape.argmax[li];
        for (std::size_t i = 0; i < grad.size(); ++i) dx[arg[i]] += grad[i];
        break;
      }
      case LayerKind::kRelu:
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = x[i] > 0.0 ? grad[i] : 0.0;
        break;
      case LayerKind::kTanh:
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = grad[i] * (1.0 - y[i] * y[i]);
        break;
      case LayerKind::kFlatten:
        dx = grad;
        break;
    }
    grad = std::move(dx);
  }
  g.d_input = std::move(grad);
  return g;
}

double softmax_cross_entropy(std::span<const double> logits, std::span<const int> labels,
                             std::size_t n_classes, std::vector<double>* d_logits) {
  const std::size_t batch = labels.size();
  if (batch == 0 || logits.size() != batch * n_classes) {
    throw ShapeError("logits/labels size mismatch");
  }
  if (d_logits) d_logits->assign(logits.size(), 0.0);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (std::size_t s = 0; s < batch; ++s) {
    const int label = labels[s];
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
      throw InvalidArgumentError("label " + std::to_string(label) + " outside [0, " +
                                 std::to_string(n_classes) + ")");
    }
    const double* row = logits.data() + s * n_classes;
    const double mx = *std::max_element(row, row + n_classes);
    double z = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) z += std::exp(row[c] - mx);
    const double log_z = mx + std::log(z);
    total += log_z - row[label];
    if (d_logits) {
      double* drow = d_logits->data() + s * n_classes;
      for (std::size_t c = 0; c < n_classes; ++c) {
        drow[c] = std::exp(row[c] - log_z) * inv_batch;
      }
      drow[label] -= inv_batch;
    }
  }
  return total * inv_batch;
}

std::size_t count_correct(std::span<const double> logits, std::span<const int> labels,
                          std::size_t n_classes) {
  std::size_t correct = 0;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const double* row = logits.data() + s * n_classes;
    const auto best = std::max_element(row, row + n_classes) - row;
    if (best == labels[s]) ++correct;
  }
  return correct;
}

LossAndGrad loss_and_grad(const ModelSpec& spec, std::span<const double> omega,
                          const Batch& batch) {
  if (spec.output_shape().size() != 1) {
    throw ShapeError("classification head must be flat, got " + to_string(spec.output_shape()));
  }
  Tape tape;
  const auto logits = forward(spec, omega, batch.inputs, batch.size(), &tape);
  std::vector<double> d_logits;
  LossAndGrad out;
  out.loss = softmax_cross_entropy(logits, batch.labels, spec.output_shape()[0], &d_logits);
  out.d_omega = backward(spec, omega, tape, d_logits).d_omega;
  return out;
}

}  // namespace fqt::nn
