#include "loadgan/eval/wasserstein.hpp"

#include <algorithm>
#include <cmath>

#include "loadgan/error.hpp"

namespace loadgan::eval {

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::EmptyInput, "wasserstein1 needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite)) {
    fail(ErrorCode::NumericError, "wasserstein1: non-finite sample");
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());

  // Sweep the merged order; between consecutive support points the CDFs are
  // constant at i/na and j/nb.
  std::size_t i = 0, j = 0;
  double total = 0.0;
  double prev = std::min(x.front(), y.front());
  while (i < x.size() || j < y.size()) {
    double next;
    if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
      next = x[i];
    } else {
      next = y[j];
    }
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - prev);
    while (i < x.size() && x[i] == next) ++i;
    while (j < y.size() && y[j] == next) ++j;
    prev = next;
  }
  return total;
}

std::vector<double> wasserstein1_per_column(std::span<const double> a, std::span<const double> b, std::size_t width) {
  if (width == 0 || a.size() % width != 0 || b.size() % width != 0) {
    fail(ErrorCode::ShapeMismatch, "wasserstein1_per_column: sizes are not multiples of the width");
  }
  std::vector<double> out(width);
  std::vector<double> ca(a.size() / width), cb(b.size() / width);
  for (std::size_t c = 0; c < width; ++c) {
    for (std::size_t r = 0; r < ca.size(); ++r) ca[r] = a[r * width + c];
    for (std::size_t r = 0; r < cb.size(); ++r) cb[r] = b[r * width + c];
    out[c] = wasserstein1(ca, cb);
  }
  return out;
}

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) fail(ErrorCode::BadConfig, "histogram needs bins > 0 and hi > lo");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) h.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::NumericError, "histogram: non-finite value");
    const double pos = (v - lo) / (hi - lo) * static_cast<double>(bins);
    const auto k = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    ++h.counts[k];
  }
  h.total = values.size();
  return h;
}

}  // namespace loadgan::eval
