#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace loadgan::dsp {

/// One-sided periodogram of a mean-removed series, normalized so the bins sum
/// to the (population) variance of the series. Length n/2 + 1; bin k sits at
/// k/n cycles per sample.
std::vector<double> one_sided_periodogram(std::span<const double> series);

}  // namespace loadgan::dsp
