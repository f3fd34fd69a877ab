#include "loadgan/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "loadgan/error.hpp"

namespace loadgan::nn {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatrixMap cmat(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  return {v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}
MatrixMap mat(std::vector<double>& v, std::size_t rows, std::size_t cols) {
  return {v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}
ConstMatrixMap cmat(const double* p, std::size_t rows, std::size_t cols) {
  return {p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}
MatrixMap mat(double* p, std::size_t rows, std::size_t cols) {
  return {p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

void require(bool ok, const std::string& message) {
  if (!ok) fail(ErrorCode::ShapeMismatch, message);
}

bool wants_grad(const Node* n) { return n && n->requires_grad; }

// out[r] += sum of row r, accumulated left to right whatever the alignment.
void add_row_sums(const double* m, std::size_t rows, std::size_t cols, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += m[r * cols + c];
    out[r] += acc;
  }
}

// out[c] += sum of column c, accumulated top to bottom.
void add_column_sums(const double* m, std::size_t rows, std::size_t cols, double* out) {
  std::vector<double> acc(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) acc[c] += m[r * cols + c];
  }
  for (std::size_t c = 0; c < cols; ++c) out[c] += acc[c];
}

// cols[(c * k + j), t] = x[c, t * stride - padding + j], zero outside.
void im2col(const double* x, std::size_t channels, std::size_t length, std::size_t kernel, std::size_t stride,
            std::size_t padding, std::size_t out_length, double* cols) {
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t j = 0; j < kernel; ++j) {
      double* row = cols + (c * kernel + j) * out_length;
      for (std::size_t t = 0; t < out_length; ++t) {
        const long src = static_cast<long>(t * stride + j) - static_cast<long>(padding);
        row[t] = (src >= 0 && src < static_cast<long>(length)) ? x[c * length + static_cast<std::size_t>(src)] : 0.0;
      }
    }
  }
}

// Adjoint of im2col: x[c, t * stride - padding + j] += cols[(c * k + j), t].
void col2im(const double* cols, std::size_t channels, std::size_t length, std::size_t kernel, std::size_t stride,
            std::size_t padding, std::size_t out_length, double* x) {
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t j = 0; j < kernel; ++j) {
      const double* row = cols + (c * kernel + j) * out_length;
      for (std::size_t t = 0; t < out_length; ++t) {
        const long dst = static_cast<long>(t * stride + j) - static_cast<long>(padding);
        if (dst >= 0 && dst < static_cast<long>(length)) x[c * length + static_cast<std::size_t>(dst)] += row[t];
      }
    }
  }
}

template <typename Forward, typename Derivative>
Tensor unary(const Tensor& x, Forward f, Derivative df) {
  std::vector<double> out(x.size());
  const auto& in = x.node()->value;
  std::transform(in.begin(), in.end(), out.begin(), f);
  Node* px = x.node();
  return detail::make_result(x.shape(), std::move(out), {x}, [px, df](Node& self) {
    auto& gx = px->grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] * df(px->value[i], self.value[i]);
  });
}

double stable_sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride, std::size_t padding) {
  require(stride > 0 && kernel > 0, "conv1d needs positive kernel and stride");
  require(length + 2 * padding >= kernel, "conv1d kernel does not fit the padded input");
  return (length + 2 * padding - kernel) / stride + 1;
}

std::size_t conv_transpose1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                                           std::size_t padding) {
  require(stride > 0 && kernel > 0 && length > 0, "tconv1d needs positive dimensions");
  const long out = static_cast<long>((length - 1) * stride + kernel) - 2 * static_cast<long>(padding);
  require(out > 0, "tconv1d output length must be positive");
  return static_cast<std::size_t>(out);
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require(weight.rank() == 2, "linear weight must be [out, in]");
  const std::size_t out_f = weight.dim(0), in_f = weight.dim(1);
  require(x.rank() >= 1 && x.shape().back() == in_f,
          "linear input " + shape_string(x.shape()) + " does not match weight " + shape_string(weight.shape()));
  require(!bias.defined() || (bias.size() == out_f), "linear bias must have out entries");
  const std::size_t batch = x.size() / in_f;

  std::vector<double> y(batch * out_f);
  auto Y = mat(y, batch, out_f);
  Y.noalias() = cmat(x.node()->value, batch, in_f) * cmat(weight.node()->value, out_f, in_f).transpose();
  if (bias.defined()) Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.node()->value.data(), static_cast<Eigen::Index>(out_f));

  Shape shape = x.shape();
  shape.back() = out_f;
  Node *px = x.node(), *pw = weight.node(), *pb = bias.defined() ? bias.node() : nullptr;
  return detail::make_result(std::move(shape), std::move(y), {x, weight, bias}, [=](Node& self) {
    const auto dY = cmat(self.grad, batch, out_f);
    if (wants_grad(px)) mat(px->grad_buffer(), batch, in_f).noalias() += dY * cmat(pw->value, out_f, in_f);
    if (wants_grad(pw)) mat(pw->grad_buffer(), out_f, in_f).noalias() += dY.transpose() * cmat(px->value, batch, in_f);
    if (wants_grad(pb)) add_column_sums(self.grad.data(), batch, out_f, pb->grad_buffer().data());
  });
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride, std::size_t padding) {
  require(x.rank() == 3, "conv1d input must be [batch, channels, length]");
  require(weight.rank() == 3 && weight.dim(1) == x.dim(1), "conv1d weight must be [c_out, c_in, k] with matching c_in");
  const std::size_t batch = x.dim(0), c_in = x.dim(1), length = x.dim(2);
  const std::size_t c_out = weight.dim(0), kernel = weight.dim(2);
  require(!bias.defined() || bias.size() == c_out, "conv1d bias must have c_out entries");
  const std::size_t out_len = conv1d_output_length(length, kernel, stride, padding);
  const std::size_t patch = c_in * kernel;

  std::vector<double> y(batch * c_out * out_len);
  std::vector<double> cols(patch * out_len);
  const auto W = cmat(weight.node()->value, c_out, patch);
  for (std::size_t b = 0; b < batch; ++b) {
    im2col(x.node()->value.data() + b * c_in * length, c_in, length, kernel, stride, padding, out_len, cols.data());
    auto Y = mat(y.data() + b * c_out * out_len, c_out, out_len);
    Y.noalias() = W * cmat(cols, patch, out_len);
    if (bias.defined()) Y.colwise() += ConstVectorMap(bias.node()->value.data(), static_cast<Eigen::Index>(c_out));
  }

  Node *px = x.node(), *pw = weight.node(), *pb = bias.defined() ? bias.node() : nullptr;
  return detail::make_result({batch, c_out, out_len}, std::move(y), {x, weight, bias}, [=](Node& self) {
    std::vector<double> cols(patch * out_len), dcols(patch * out_len);
    const auto W = cmat(pw->value, c_out, patch);
    for (std::size_t b = 0; b < batch; ++b) {
      const auto dY = cmat(self.grad.data() + b * c_out * out_len, c_out, out_len);
      if (wants_grad(pw)) {
        im2col(px->value.data() + b * c_in * length, c_in, length, kernel, stride, padding, out_len, cols.data());
        mat(pw->grad_buffer(), c_out, patch).noalias() += dY * cmat(cols, patch, out_len).transpose();
      }
      if (wants_grad(pb)) add_row_sums(self.grad.data() + b * c_out * out_len, c_out, out_len, pb->grad_buffer().data());
      if (wants_grad(px)) {
        mat(dcols, patch, out_len).noalias() = W.transpose() * dY;
        col2im(dcols.data(), c_in, length, kernel, stride, padding, out_len, px->grad_buffer().data() + b * c_in * length);
      }
    }
  });
}

Tensor conv_transpose1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride,
                        std::size_t padding) {
  require(x.rank() == 3, "tconv1d input must be [batch, channels, length]");
  require(weight.rank() == 3 && weight.dim(0) == x.dim(1), "tconv1d weight must be [c_in, c_out, k] with matching c_in");
  const std::size_t batch = x.dim(0), c_in = x.dim(1), length = x.dim(2);
  const std::size_t c_out = weight.dim(1), kernel = weight.dim(2);
  require(!bias.defined() || bias.size() == c_out, "tconv1d bias must have c_out entries");
  const std::size_t out_len = conv_transpose1d_output_length(length, kernel, stride, padding);
  const std::size_t patch = c_out * kernel;

  // The output is the col2im of W^T x, with the input length playing the
  // role of conv1d's output length.
  std::vector<double> y(batch * c_out * out_len, 0.0);
  std::vector<double> cols(patch * length);
  const auto W = cmat(weight.node()->value, c_in, patch);
  for (std::size_t b = 0; b < batch; ++b) {
    mat(cols, patch, length).noalias() = W.transpose() * cmat(x.node()->value.data() + b * c_in * length, c_in, length);
    double* yb = y.data() + b * c_out * out_len;
    col2im(cols.data(), c_out, out_len, kernel, stride, padding, length, yb);
    if (bias.defined()) {
      mat(yb, c_out, out_len).colwise() += ConstVectorMap(bias.node()->value.data(), static_cast<Eigen::Index>(c_out));
    }
  }

  Node *px = x.node(), *pw = weight.node(), *pb = bias.defined() ? bias.node() : nullptr;
  return detail::make_result({batch, c_out, out_len}, std::move(y), {x, weight, bias}, [=](Node& self) {
    std::vector<double> dcols(patch * length);
    const auto W = cmat(pw->value, c_in, patch);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* dyb = self.grad.data() + b * c_out * out_len;
      if (wants_grad(pb)) {
        add_row_sums(dyb, c_out, out_len, pb->grad_buffer().data());
      }
      if (!wants_grad(px) && !wants_grad(pw)) continue;
      im2col(dyb, c_out, out_len, kernel, stride, padding, length, dcols.data());
      const auto dC = cmat(dcols, patch, length);
      if (wants_grad(px)) mat(px->grad_buffer().data() + b * c_in * length, c_in, length).noalias() += W * dC;
      if (wants_grad(pw)) {
        mat(pw->grad_buffer(), c_in, patch).noalias() +=
            cmat(px->value.data() + b * c_in * length, c_in, length) * dC.transpose();
      }
    }
  });
}

Tensor relu(const Tensor& x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(x, [slope](double v) { return v > 0.0 ? v : slope * v; },
               [slope](double in, double) { return in > 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, stable_sigmoid, [](double, double out) { return out * (1.0 - out); });
}

Tensor tanh(const Tensor& x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double out) { return 1.0 - out * out; });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "add needs equal shapes");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.node()->value[i] + b.node()->value[i];
  Node *pa = a.node(), *pb = b.node();
  return detail::make_result(a.shape(), std::move(out), {a, b}, [pa, pb](Node& self) {
    for (Node* p : {pa, pb}) {
      if (!wants_grad(p)) continue;
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "mul needs equal shapes");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.node()->value[i] * b.node()->value[i];
  Node *pa = a.node(), *pb = b.node();
  return detail::make_result(a.shape(), std::move(out), {a, b}, [pa, pb](Node& self) {
    if (wants_grad(pa)) {
      auto& g = pa->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb->value[i];
    }
    if (wants_grad(pb)) {
      auto& g = pb->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa->value[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, [factor](double v) { return factor * v; }, [factor](double, double) { return factor; });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  Node* pa = a.node();
  return detail::make_result({1}, {total}, {a}, [pa](Node& self) {
    auto& g = pa->grad_buffer();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor weighted_sum(const Tensor& a, std::span<const double> weights) {
  require(weights.size() == a.size(), "weighted_sum needs one weight per entry");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a.node()->value[i] * weights[i];
  Node* pa = a.node();
  std::vector<double> w(weights.begin(), weights.end());
  return detail::make_result({1}, {total}, {a}, [pa, w = std::move(w)](Node& self) {
    auto& g = pa->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * w[i];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  require(shape_size(shape) == x.size(), "reshape " + shape_string(x.shape()) + " -> " + shape_string(shape));
  Node* px = x.node();
  return detail::make_result(std::move(shape), x.node()->value, {x}, [px](Node& self) {
    auto& g = px->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor concat_columns(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.dim(0) == b.dim(0), "concat_columns needs [batch, m] and [batch, n]");
  const std::size_t batch = a.dim(0), m = a.dim(1), n = b.dim(1);
  std::vector<double> out(batch * (m + n));
  for (std::size_t r = 0; r < batch; ++r) {
    std::copy_n(a.node()->value.data() + r * m, m, out.data() + r * (m + n));
    std::copy_n(b.node()->value.data() + r * n, n, out.data() + r * (m + n) + m);
  }
  Node *pa = a.node(), *pb = b.node();
  return detail::make_result({batch, m + n}, std::move(out), {a, b}, [=](Node& self) {
    for (std::size_t r = 0; r < batch; ++r) {
      if (wants_grad(pa)) {
        auto& g = pa->grad_buffer();
        for (std::size_t j = 0; j < m; ++j) g[r * m + j] += self.grad[r * (m + n) + j];
      }
      if (wants_grad(pb)) {
        auto& g = pb->grad_buffer();
        for (std::size_t j = 0; j < n; ++j) g[r * n + j] += self.grad[r * (m + n) + m + j];
      }
    }
  });
}

Tensor slice_columns(const Tensor& x, std::size_t begin, std::size_t count) {
  require(x.rank() == 2 && begin + count <= x.dim(1), "slice_columns out of range");
  const std::size_t batch = x.dim(0), n = x.dim(1);
  std::vector<double> out(batch * count);
  for (std::size_t r = 0; r < batch; ++r) {
    std::copy_n(x.node()->value.data() + r * n + begin, count, out.data() + r * count);
  }
  Node* px = x.node();
  return detail::make_result({batch, count}, std::move(out), {x}, [=](Node& self) {
    auto& g = px->grad_buffer();
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t j = 0; j < count; ++j) g[r * n + begin + j] += self.grad[r * count + j];
    }
  });
}

Tensor lstm_pointwise(const Tensor& gates, const Tensor& cell) {
  require(gates.rank() == 2 && cell.rank() == 2 && gates.dim(0) == cell.dim(0) && gates.dim(1) == 4 * cell.dim(1),
          "lstm gates must be [batch, 4H] with cell [batch, H]");
  const std::size_t batch = cell.dim(0), hidden = cell.dim(1);
  // Activated gates are kept for the backward pass.
  std::vector<double> act(batch * 4 * hidden);
  std::vector<double> out(batch * 2 * hidden);
  const auto& gv = gates.node()->value;
  const auto& cv = cell.node()->value;
  for (std::size_t r = 0; r < batch; ++r) {
    const double* g = gv.data() + r * 4 * hidden;
    double* a = act.data() + r * 4 * hidden;
    double* o = out.data() + r * 2 * hidden;
    for (std::size_t j = 0; j < hidden; ++j) {
      const double in_gate = stable_sigmoid(g[j]);
      const double forget = stable_sigmoid(g[hidden + j]);
      const double candidate = std::tanh(g[2 * hidden + j]);
      const double out_gate = stable_sigmoid(g[3 * hidden + j]);
      const double c_next = forget * cv[r * hidden + j] + in_gate * candidate;
      a[j] = in_gate;
      a[hidden + j] = forget;
      a[2 * hidden + j] = candidate;
      a[3 * hidden + j] = out_gate;
      o[j] = out_gate * std::tanh(c_next);
      o[hidden + j] = c_next;
    }
  }
  Node *pg = gates.node(), *pc = cell.node();
  return detail::make_result({batch, 2 * hidden}, std::move(out), {gates, cell},
                             [=, act = std::move(act)](Node& self) {
    auto* dg = wants_grad(pg) ? pg->grad_buffer().data() : nullptr;
    auto* dc_prev = wants_grad(pc) ? pc->grad_buffer().data() : nullptr;
    for (std::size_t r = 0; r < batch; ++r) {
      const double* a = act.data() + r * 4 * hidden;
      const double* o = self.value.data() + r * 2 * hidden;
      const double* d = self.grad.data() + r * 2 * hidden;
      for (std::size_t j = 0; j < hidden; ++j) {
        const double in_gate = a[j], forget = a[hidden + j], candidate = a[2 * hidden + j], out_gate = a[3 * hidden + j];
        const double tanh_c = std::tanh(o[hidden + j]);
        const double dh = d[j];
        const double dc = d[hidden + j] + dh * out_gate * (1.0 - tanh_c * tanh_c);
        const double c_prev = pc->value[r * hidden + j];
        if (dg) {
          double* gr = dg + r * 4 * hidden;
          gr[j] += dc * candidate * in_gate * (1.0 - in_gate);
          gr[hidden + j] += dc * c_prev * forget * (1.0 - forget);
          gr[2 * hidden + j] += dc * in_gate * (1.0 - candidate * candidate);
          gr[3 * hidden + j] += dh * tanh_c * out_gate * (1.0 - out_gate);
        }
        if (dc_prev) dc_prev[r * hidden + j] += dc * forget;
      }
    }
  });
}

Tensor bce_loss(const Tensor& predictions, std::span<const double> targets) {
  require(predictions.size() == targets.size() && !targets.empty(), "bce_loss needs one target per prediction");
  const std::size_t n = targets.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::clamp(predictions.node()->value[i], kBceEpsilon, 1.0 - kBceEpsilon);
    total -= targets[i] * std::log(p) + (1.0 - targets[i]) * std::log(1.0 - p);
  }
  Node* pp = predictions.node();
  std::vector<double> t(targets.begin(), targets.end());
  return detail::make_result({1}, {total / static_cast<double>(n)}, {predictions}, [pp, t = std::move(t)](Node& self) {
    auto& g = pp->grad_buffer();
    const double scale = self.grad[0] / static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      // Derivative of the clamped expression, evaluated at the clamped point.
      const double p = std::clamp(pp->value[i], kBceEpsilon, 1.0 - kBceEpsilon);
      g[i] += scale * (-t[i] / p + (1.0 - t[i]) / (1.0 - p));
    }
  });
}

Tensor mse_loss(const Tensor& predictions, std::span<const double> targets) {
  require(predictions.size() == targets.size() && !targets.empty(), "mse_loss needs one target per prediction");
  const std::size_t n = targets.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = predictions.node()->value[i] - targets[i];
    total += diff * diff;
  }
  Node* pp = predictions.node();
  std::vector<double> t(targets.begin(), targets.end());
  return detail::make_result({1}, {total / static_cast<double>(n)}, {predictions}, [pp, t = std::move(t)](Node& self) {
    auto& g = pp->grad_buffer();
    const double scale = 2.0 * self.grad[0] / static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) g[i] += scale * (pp->value[i] - t[i]);
  });
}

}  // namespace loadgan::nn
