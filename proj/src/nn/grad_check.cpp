#include "loadgan/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loadgan/error.hpp"
#include "loadgan/random.hpp"

namespace loadgan::nn {

GradCheckResult grad_check(const std::function<Tensor()>& loss, const std::vector<Tensor>& inputs,
                           const GradCheckOptions& options) {
  for (auto t : inputs) t.zero_grad();
  const Tensor out = loss();
  out.backward();

  std::vector<std::vector<double>> analytic;
  for (const auto& t : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());

  auto eval = [&] {
    NoGradGuard guard;
    const double v = loss().item();
    if (!std::isfinite(v)) fail(ErrorCode::NumericError, "grad_check: non-finite loss");
    return v;
  };

  GradCheckResult result;
  Rng rng = make_rng(options.seed);
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
    Tensor t = inputs[ti];
    std::vector<std::size_t> entries(t.size());
    std::iota(entries.begin(), entries.end(), 0);
    if (options.max_entries_per_tensor > 0 && entries.size() > options.max_entries_per_tensor) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(options.max_entries_per_tensor);
    }
    auto values = t.mutable_values();
    for (std::size_t i : entries) {
      const double original = values[i];
      values[i] = original + options.eps;
      const double plus = eval();
      values[i] = original - options.eps;
      const double minus = eval();
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      const double a = analytic[ti][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
      ++result.entries_checked;
    }
  }
  return result;
}

}  // namespace loadgan::nn
