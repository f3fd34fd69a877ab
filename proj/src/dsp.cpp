#include "loadgan/dsp.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "loadgan/error.hpp"

namespace loadgan::dsp {

// Direct DFT over a twiddle table; inputs are a week of hourly samples, so the
// O(n^2) cost is irrelevant next to keeping the summation order fixed.
std::vector<double> one_sided_periodogram(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n == 0) {
    fail(ErrorCode::EmptyInput, "periodogram of an empty series");
  }
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t t = 0; t < n; ++t) centered[t] = series[t] - mean;

  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    cos_table[j] = std::cos(angle);
    sin_table[j] = std::sin(angle);
  }

  const std::size_t bins = n / 2 + 1;
  std::vector<double> power(bins);
  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t k = 0; k < bins; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t phase = 0;
    for (std::size_t t = 0; t < n; ++t) {
      re += centered[t] * cos_table[phase];
      im -= centered[t] * sin_table[phase];
      phase += k;
      if (phase >= n) phase -= n;
    }
    const bool unpaired = (k == 0) || (n % 2 == 0 && k == n / 2);
    power[k] = (unpaired ? 1.0 : 2.0) * (re * re + im * im) * norm;
  }
  return power;
}

}  // namespace loadgan::dsp
