#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "loadgan/nn/tensor.hpp"

namespace loadgan::nn {

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamMoments {
  std::vector<double> first;
  std::vector<double> second;
};

struct OptimizerState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<AdamMoments> moments;  // one per parameter tensor
};

/// Bias-corrected Adam update of one flat parameter array. `step` is the
/// 1-based index of this update.
void adam_update(std::span<double> params, std::span<const double> grads, AdamMoments& moments,
                 const AdamConfig& config, std::uint64_t step);

/// Adam over a parameter list using each tensor's accumulated grad.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  void step();
  void zero_grad();

  const std::vector<Tensor>& parameters() const { return params_; }
  const OptimizerState& state() const { return state_; }
  /// Replaces moments and step counter, e.g. when resuming.
  void restore(OptimizerState state);
  void set_learning_rate(double rate) { state_.config.learning_rate = rate; }

 private:
  std::vector<Tensor> params_;
  OptimizerState state_;
};

}  // namespace loadgan::nn
