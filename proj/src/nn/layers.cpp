#include "loadgan/nn/layers.hpp"

#include <cmath>

#include "loadgan/error.hpp"
#include "loadgan/nn/ops.hpp"

namespace loadgan::nn {

void LayerSpec::validate() const {
  const bool has_dims = kind == LayerKind::Activation || (in > 0 && out > 0);
  if (!has_dims) fail(ErrorCode::ShapeMismatch, "layer dimensions must be positive");
  if (kind == LayerKind::Conv1d || kind == LayerKind::TConv1d) {
    if (kernel == 0 || stride == 0) fail(ErrorCode::ShapeMismatch, "convolution needs positive kernel and stride");
  }
  if (kind == LayerKind::TConv1d && kernel + stride <= 2 * padding) {
    // Even a length-1 input would produce no output.
    fail(ErrorCode::ShapeMismatch, "tconv geometry yields no output");
  }
}

std::size_t LayerSpec::output_length(std::size_t length) const {
  switch (kind) {
    case LayerKind::Conv1d: return conv1d_output_length(length, kernel, stride, padding);
    case LayerKind::TConv1d: return conv_transpose1d_output_length(length, kernel, stride, padding);
    default: return length;
  }
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out, Activation act) {
  return {LayerKind::Dense, act, in, out, 0, 1, 0};
}
LayerSpec LayerSpec::conv(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, std::size_t padding,
                          Activation act) {
  return {LayerKind::Conv1d, act, in, out, kernel, stride, padding};
}
LayerSpec LayerSpec::tconv(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
                           std::size_t padding, Activation act) {
  return {LayerKind::TConv1d, act, in, out, kernel, stride, padding};
}
LayerSpec LayerSpec::lstm(std::size_t in, std::size_t hidden) {
  return {LayerKind::Lstm, Activation::None, in, hidden, 0, 1, 0};
}

Tensor activate(const Tensor& x, Activation activation) {
  switch (activation) {
    case Activation::None: return x;
    case Activation::Relu: return relu(x);
    case Activation::LeakyRelu: return leaky_relu(x, kLeakySlope);
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::Tanh: return tanh(x);
  }
  return x;
}

std::vector<Shape> parameter_shapes(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Dense: return {{spec.out, spec.in}, {spec.out}};
    case LayerKind::Conv1d: return {{spec.out, spec.in, spec.kernel}, {spec.out}};
    case LayerKind::TConv1d: return {{spec.in, spec.out, spec.kernel}, {spec.out}};
    case LayerKind::Lstm: return {{4 * spec.out, spec.in}, {4 * spec.out, spec.out}, {4 * spec.out}};
    case LayerKind::Activation: return {};
  }
  return {};
}

Layer::Layer(const LayerSpec& spec) : spec_(spec) {
  spec_.validate();
  for (auto& shape : parameter_shapes(spec_)) params_.push_back(Tensor::zeros(std::move(shape), true));
}

Layer::Layer(const Layer& other) : spec_(other.spec_) {
  for (const auto& p : other.params_) params_.push_back(p.clone(true));
}

Layer& Layer::operator=(const Layer& other) {
  if (this != &other) *this = Layer(other);
  return *this;
}

Layer::Layer(const LayerSpec& spec, Rng& rng) : Layer(spec) {
  double fan_in = 0.0, fan_out = 0.0;
  switch (spec_.kind) {
    case LayerKind::Dense:
    case LayerKind::Lstm:
      fan_in = static_cast<double>(spec_.in);
      fan_out = static_cast<double>(spec_.out);
      break;
    case LayerKind::Conv1d:
    case LayerKind::TConv1d:
      fan_in = static_cast<double>(spec_.in * spec_.kernel);
      fan_out = static_cast<double>(spec_.out * spec_.kernel);
      break;
    case LayerKind::Activation: return;
  }
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> u(-bound, bound);
  // Every parameter but the trailing bias is a weight matrix.
  for (std::size_t i = 0; i + 1 < params_.size(); ++i) {
    for (double& w : params_[i].mutable_values()) w = u(rng);
  }
  if (spec_.kind == LayerKind::Lstm) {
    auto bias = params_.back().mutable_values();
    for (std::size_t j = spec_.out; j < 2 * spec_.out; ++j) bias[j] = 1.0;
  }
}

Tensor Layer::forward(const Tensor& x) const {
  switch (spec_.kind) {
    case LayerKind::Dense: return activate(linear(x, params_[0], params_[1]), spec_.activation);
    case LayerKind::Conv1d:
      return activate(conv1d(x, params_[0], params_[1], spec_.stride, spec_.padding), spec_.activation);
    case LayerKind::TConv1d:
      return activate(conv_transpose1d(x, params_[0], params_[1], spec_.stride, spec_.padding), spec_.activation);
    case LayerKind::Activation: return activate(x, spec_.activation);
    case LayerKind::Lstm: break;
  }
  fail(ErrorCode::ShapeMismatch, "LSTM layers advance with step()");
}

Layer::LstmState Layer::step(const Tensor& x, const LstmState& state) const {
  if (spec_.kind != LayerKind::Lstm) fail(ErrorCode::ShapeMismatch, "step() is only defined for LSTM layers");
  const Tensor gates = add(linear(x, params_[0], params_[2]), linear(state.h, params_[1], Tensor{}));
  const Tensor hc = lstm_pointwise(gates, state.c);
  return {slice_columns(hc, 0, spec_.out), slice_columns(hc, spec_.out, spec_.out)};
}

std::vector<Tensor> collect_parameters(const std::vector<Layer>& layers) {
  std::vector<Tensor> out;
  for (const auto& layer : layers) out.insert(out.end(), layer.parameters().begin(), layer.parameters().end());
  return out;
}

std::size_t parameter_count(const std::vector<Tensor>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

std::vector<double> flatten_parameters(const std::vector<Tensor>& params) {
  std::vector<double> flat;
  flat.reserve(parameter_count(params));
  for (const auto& p : params) flat.insert(flat.end(), p.values().begin(), p.values().end());
  return flat;
}

void assign_parameters(const std::vector<Tensor>& params, std::span<const double> flat) {
  if (flat.size() != parameter_count(params)) {
    fail(ErrorCode::ShapeMismatch, "parameter array has " + std::to_string(flat.size()) + " values, model needs " +
                                       std::to_string(parameter_count(params)));
  }
  std::size_t offset = 0;
  for (auto p : params) {
    auto dst = p.mutable_values();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), dst.size(), dst.begin());
    offset += dst.size();
  }
}

}  // namespace loadgan::nn
