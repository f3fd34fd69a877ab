#include "loadgan/eval/psd.hpp"

#include <cmath>

#include "loadgan/corpus_io.hpp"
#include "loadgan/dsp.hpp"
#include "loadgan/error.hpp"

namespace loadgan::eval {

namespace {

constexpr std::size_t kHoursPerDay = 24;
constexpr double kPowerFloor = 1e-300;

}  // namespace

SpectrumResult ensemble_psd(std::span<const double> profiles, std::size_t length) {
  if (length < 2) fail(ErrorCode::BadConfig, "ensemble_psd needs length >= 2");
  if (profiles.empty()) fail(ErrorCode::EmptyInput, "ensemble_psd of an empty set");
  if (profiles.size() % length != 0) fail(ErrorCode::ShapeMismatch, "profile matrix is not a multiple of the length");
  const std::size_t n = profiles.size() / length;
  SpectrumResult out;
  out.profiles = n;
  out.power.assign(length / 2 + 1, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto p = dsp::one_sided_periodogram(profiles.subspan(r * length, length));
    for (std::size_t k = 0; k < p.size(); ++k) out.power[k] += p[k];
  }
  for (double& v : out.power) v /= static_cast<double>(n);
  out.frequencies.resize(out.power.size());
  for (std::size_t k = 0; k < out.frequencies.size(); ++k) {
    out.frequencies[k] = static_cast<double>(k) / static_cast<double>(length);
  }
  return out;
}

std::size_t dominant_bin(const SpectrumResult& spectrum) {
  if (spectrum.power.size() < 2) fail(ErrorCode::EmptyInput, "spectrum has no non-DC bins");
  std::size_t best = 1;
  for (std::size_t k = 2; k < spectrum.power.size(); ++k) {
    if (spectrum.power[k] > spectrum.power[best]) best = k;
  }
  return best;
}

std::vector<std::size_t> diurnal_bins(std::size_t length) {
  std::vector<std::size_t> bins;
  if (length % kHoursPerDay != 0) return bins;
  const std::size_t step = length / kHoursPerDay;
  for (std::size_t k = step; k <= length / 2; k += step) bins.push_back(k);
  return bins;
}

PsdComparison compare_psd(std::span<const double> real, std::span<const double> synthetic, std::size_t length) {
  const auto a = ensemble_psd(real, length);
  const auto b = ensemble_psd(synthetic, length);
  PsdComparison c;
  c.frequencies = a.frequencies;
  c.log_power_difference.resize(a.power.size());
  for (std::size_t k = 0; k < a.power.size(); ++k) {
    c.log_power_difference[k] =
        a.power[k] == b.power[k] ? 0.0 : std::log(std::max(b.power[k], kPowerFloor)) - std::log(std::max(a.power[k], kPowerFloor));
  }
  for (std::size_t k : diurnal_bins(length)) {
    c.max_abs_diurnal_difference = std::max(c.max_abs_diurnal_difference, std::abs(c.log_power_difference[k]));
  }
  c.real_peak_bin = dominant_bin(a);
  c.synthetic_peak_bin = dominant_bin(b);
  return c;
}

std::string spectrum_csv(const SpectrumResult& spectrum) {
  std::string out = "freq_cph,power\n";
  for (std::size_t k = 0; k < spectrum.power.size(); ++k) {
    out += corpus::format_double(spectrum.frequencies[k]) + ',' + corpus::format_double(spectrum.power[k]) + '\n';
  }
  return out;
}

std::string comparison_csv(const PsdComparison& comparison) {
  std::string out = "freq_cph,log_power_difference\n";
  for (std::size_t k = 0; k < comparison.frequencies.size(); ++k) {
    out += corpus::format_double(comparison.frequencies[k]) + ',' +
           corpus::format_double(comparison.log_power_difference[k]) + '\n';
  }
  return out;
}

}  // namespace loadgan::eval
