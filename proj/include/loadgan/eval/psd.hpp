#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace loadgan::eval {

/// Mean one-sided periodogram of an ensemble of equal-length profiles.
struct SpectrumResult {
  std::vector<double> frequencies;  // cycles per hour, k / length
  std::vector<double> power;
  std::size_t profiles = 0;
};

/// `profiles` is row-major with `length` columns.
SpectrumResult ensemble_psd(std::span<const double> profiles, std::size_t length = 168);

/// Index of the largest non-DC bin (lowest index on ties).
std::size_t dominant_bin(const SpectrumResult& spectrum);

/// Bins at multiples of one cycle per day, excluding DC.
std::vector<std::size_t> diurnal_bins(std::size_t length = 168);

struct PsdComparison {
  std::vector<double> frequencies;
  /// ln(synthetic power) - ln(real power) per bin, zero where both vanish.
  std::vector<double> log_power_difference;
  double max_abs_diurnal_difference = 0.0;
  std::size_t real_peak_bin = 0;
  std::size_t synthetic_peak_bin = 0;
};

PsdComparison compare_psd(std::span<const double> real, std::span<const double> synthetic,
                          std::size_t length = 168);

/// `freq_cph,power` rows.
std::string spectrum_csv(const SpectrumResult& spectrum);
std::string comparison_csv(const PsdComparison& comparison);

}  // namespace loadgan::eval
