#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "loadgan/nn/tensor.hpp"

namespace loadgan::nn {

struct GradCheckOptions {
  double eps = 1e-4;
  /// Entries probed per tensor; 0 probes every entry. Sampled entries are
  /// drawn with `seed`.
  std::size_t max_entries_per_tensor = 0;
  std::uint64_t seed = 7;
  /// Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
};

/// Compares reverse-mode gradients of a scalar `loss` with central
/// differences, perturbing entries of `inputs` in place (restored after).
/// `loss` must rebuild its graph from the current input values on every call.
GradCheckResult grad_check(const std::function<Tensor()>& loss, const std::vector<Tensor>& inputs,
                           const GradCheckOptions& options = {});

}  // namespace loadgan::nn
