#include "loadgan/nn/adam.hpp"

#include <cmath>

#include "loadgan/error.hpp"

namespace loadgan::nn {

void adam_update(std::span<double> params, std::span<const double> grads, AdamMoments& moments,
                 const AdamConfig& config, std::uint64_t step) {
  if (grads.size() != params.size()) fail(ErrorCode::ShapeMismatch, "adam: grad and parameter sizes differ");
  if (moments.first.empty() && moments.second.empty()) {
    moments.first.assign(params.size(), 0.0);
    moments.second.assign(params.size(), 0.0);
  }
  if (moments.first.size() != params.size() || moments.second.size() != params.size()) {
    fail(ErrorCode::ShapeMismatch, "adam: moment sizes differ from parameters");
  }
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    moments.first[i] = config.beta1 * moments.first[i] + (1.0 - config.beta1) * g;
    moments.second[i] = config.beta2 * moments.second[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = moments.first[i] / correction1;
    const double v_hat = moments.second[i] / correction2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

Adam::Adam(std::vector<Tensor> params, AdamConfig config) : params_(std::move(params)) {
  state_.config = config;
  state_.moments.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    state_.moments[i].first.assign(params_[i].size(), 0.0);
    state_.moments[i].second.assign(params_[i].size(), 0.0);
  }
}

void Adam::step() {
  ++state_.step;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    adam_update(params_[i].mutable_values(), params_[i].grad(), state_.moments[i], state_.config, state_.step);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::restore(OptimizerState state) {
  if (state.moments.size() != params_.size()) fail(ErrorCode::ShapeMismatch, "optimizer state does not match model");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (state.moments[i].first.size() != params_[i].size() || state.moments[i].second.size() != params_[i].size()) {
      fail(ErrorCode::ShapeMismatch, "optimizer moment shape does not match parameter");
    }
  }
  state_ = std::move(state);
}

}  // namespace loadgan::nn
