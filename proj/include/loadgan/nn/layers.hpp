#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "loadgan/nn/tensor.hpp"
#include "loadgan/random.hpp"

namespace loadgan::nn {

enum class LayerKind : std::uint8_t { Dense = 0, Conv1d = 1, TConv1d = 2, Lstm = 3, Activation = 4 };
enum class Activation : std::uint8_t { None = 0, Relu = 1, LeakyRelu = 2, Sigmoid = 3, Tanh = 4 };

inline constexpr double kLeakySlope = 0.2;

/// `in`/`out` are features for dense layers, channels for convolutions and
/// (input features, hidden units) for LSTM layers. The activation is applied
/// to the layer's output.
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  Activation activation = Activation::None;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;

  void validate() const;
  /// Sequence length after this layer (convolutions only).
  std::size_t output_length(std::size_t length) const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;

  static LayerSpec dense(std::size_t in, std::size_t out, Activation act);
  static LayerSpec conv(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, std::size_t padding,
                        Activation act);
  static LayerSpec tconv(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, std::size_t padding,
                         Activation act);
  static LayerSpec lstm(std::size_t in, std::size_t hidden);
};

Tensor activate(const Tensor& x, Activation activation);

/// A layer's parameters, created from its spec.
class Layer {
 public:
  /// Glorot-uniform weights, zero biases (LSTM forget gate bias 1).
  Layer(const LayerSpec& spec, Rng& rng);
  /// Zero-initialized; used when parameters are about to be loaded.
  explicit Layer(const LayerSpec& spec);

  /// Copies own their parameters.
  Layer(const Layer& other);
  Layer& operator=(const Layer& other);
  Layer(Layer&&) noexcept = default;
  Layer& operator=(Layer&&) noexcept = default;

  const LayerSpec& spec() const { return spec_; }
  const std::vector<Tensor>& parameters() const { return params_; }

  /// Dense, conv, tconv or activation layers.
  Tensor forward(const Tensor& x) const;

  /// LSTM layers only: one time step. x [batch, in], h/c [batch, hidden].
  struct LstmState {
    Tensor h, c;
  };
  LstmState step(const Tensor& x, const LstmState& state) const;

 private:
  LayerSpec spec_;
  std::vector<Tensor> params_;
};

/// Parameter shapes in declaration order.
std::vector<Shape> parameter_shapes(const LayerSpec& spec);

/// All parameters of a layer list, declaration order.
std::vector<Tensor> collect_parameters(const std::vector<Layer>& layers);
std::vector<double> flatten_parameters(const std::vector<Tensor>& params);
void assign_parameters(const std::vector<Tensor>& params, std::span<const double> flat);
std::size_t parameter_count(const std::vector<Tensor>& params);

}  // namespace loadgan::nn
