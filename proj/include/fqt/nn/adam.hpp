#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fqt::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moments over a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t n_params, AdamConfig config = {});

  /// Updates `params` in place. Throws ShapeError when sizes disagree with
  /// the moment buffers.
  void step(std::span<double> params, std::span<const double> grads);

  void reset();

  const AdamConfig& config() const { return config_; }
  std::int64_t steps() const { return t_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

}  // namespace fqt::nn
