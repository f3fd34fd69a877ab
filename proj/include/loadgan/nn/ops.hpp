#pragma once

#include <cstddef>
#include <span>

#include "loadgan/nn/tensor.hpp"

namespace loadgan::nn {

/// y = x W^T + b for x [batch, in] (or [in]), W [out, in], b [out] (optional).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Cross-correlation. x [batch, c_in, length], W [c_out, c_in, k], b [c_out].
/// Output length floor((L + 2p - k) / s) + 1.
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride, std::size_t padding);

/// Adjoint of conv1d with the same geometry. x [batch, c_in, length],
/// W [c_in, c_out, k], b [c_out]. Output length (L - 1) s + k - 2p.
Tensor conv_transpose1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride,
                        std::size_t padding);

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride, std::size_t padding);
std::size_t conv_transpose1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                                           std::size_t padding);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Sum of a elementwise-weighted by constant `weights`.
Tensor weighted_sum(const Tensor& a, std::span<const double> weights);

Tensor reshape(const Tensor& x, Shape shape);
/// [batch, m] ++ [batch, n] -> [batch, m + n]
Tensor concat_columns(const Tensor& a, const Tensor& b);
/// Columns [begin, begin + count) of a [batch, n] tensor.
Tensor slice_columns(const Tensor& x, std::size_t begin, std::size_t count);

/// Pointwise part of an LSTM cell. gates [batch, 4H] laid out (i, f, g, o);
/// c [batch, H]. Returns [batch, 2H] = (h', c').
Tensor lstm_pointwise(const Tensor& gates, const Tensor& cell);

inline constexpr double kBceEpsilon = 1e-7;

/// Mean binary cross-entropy; predictions are clamped to [eps, 1 - eps].
Tensor bce_loss(const Tensor& predictions, std::span<const double> targets);
Tensor mse_loss(const Tensor& predictions, std::span<const double> targets);

}  // namespace loadgan::nn
