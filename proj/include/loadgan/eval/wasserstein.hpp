#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace loadgan::eval {

/// Exact 1-D Wasserstein-1 distance between two empirical distributions,
/// the integral of |F_a - F_b| over the merged support.
double wasserstein1(std::span<const double> a, std::span<const double> b);

/// W1 per column of two row-major matrices with `width` columns.
std::vector<double> wasserstein1_per_column(std::span<const double> a, std::span<const double> b, std::size_t width);

struct Histogram {
  std::vector<double> edges;  // counts.size() + 1, strictly increasing
  std::vector<std::size_t> counts;
  std::size_t total = 0;
};

/// Equal-width bins over [lo, hi]; values outside are clamped into the end bins.
Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

}  // namespace loadgan::eval
