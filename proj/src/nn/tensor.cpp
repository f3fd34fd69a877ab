#include "loadgan/nn/tensor.hpp"

#include <cmath>
#include <unordered_set>

#include "loadgan/error.hpp"

namespace loadgan::nn {

namespace {

thread_local bool g_grad_enabled = true;

void check_finite(const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::NumericError, "non-finite value produced by a tensor op");
  }
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::vector<double>& Node::grad_buffer() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_size(shape) != values.size()) {
    fail(ErrorCode::ShapeMismatch, "value count does not match shape " + shape_string(shape));
  }
  check_finite(values);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

std::span<const double> Tensor::grad() const {
  return node_->grad_buffer();
}

double Tensor::item() const {
  if (size() != 1) fail(ErrorCode::ShapeMismatch, "item() on a tensor with " + std::to_string(size()) + " entries");
  return node_->value[0];
}

void Tensor::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::backward() const {
  if (size() != 1) fail(ErrorCode::ShapeMismatch, "backward() needs a scalar output");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order of the graph.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward) {
      node->grad_buffer();
      node->backward(*node);
    }
  }
}

Tensor Tensor::detach() const {
  return from(node_->shape, node_->value, false);
}

Tensor Tensor::clone(bool requires_grad) const {
  return from(node_->shape, node_->value, requires_grad);
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

namespace detail {

Tensor make_result(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs,
                   std::function<void(Node&)> backward) {
  check_finite(value);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs_grad = false;
  if (g_grad_enabled) {
    for (const auto& t : inputs) needs_grad |= t.defined() && t.requires_grad();
  }
  if (needs_grad) {
    node->requires_grad = true;
    for (const auto& t : inputs) {
      if (t.defined()) node->parents.push_back(t.shared());
    }
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

}  // namespace detail

}  // namespace loadgan::nn
