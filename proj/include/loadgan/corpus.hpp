#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace loadgan::corpus {

inline constexpr std::size_t kHoursPerWeek = 168;
inline constexpr std::size_t kSeasonCount = 4;
inline constexpr std::size_t kTypeCount = 2;
inline constexpr std::size_t kLabelWidth = kSeasonCount + kTypeCount;

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_time<std::chrono::hours>;

Date make_date(int year, unsigned month, unsigned day);
std::string format_date(Date date);
/// Accepts `YYYY-MM-DD`.
Date parse_date(std::string_view text);
/// Accepts `YYYY-MM-DD HH:MM`, `YYYY-MM-DDTHH:MM` and an optional `:SS` tail.
Timestamp parse_timestamp(std::string_view text);

enum class Season { Winter = 0, Spring = 1, Summer = 2, Fall = 3 };
/// One-hot order is (1 0) industrial, (0 1) residential.
enum class LoadType { Industrial = 0, Residential = 1 };

std::string_view season_name(Season season);
std::string_view type_name(LoadType type);
Season parse_season(std::string_view name);
LoadType parse_type(std::string_view name);

struct ConditionLabel {
  Season season = Season::Winter;
  LoadType type = LoadType::Residential;

  std::array<double, kLabelWidth> one_hot() const;
  /// Index in [0, 8): season-major, type-minor.
  std::size_t index() const { return static_cast<std::size_t>(season) * kTypeCount + static_cast<std::size_t>(type); }
  static ConditionLabel from_index(std::size_t index);
  /// Rejects vectors that are not one-hot in each sub-vector.
  static ConditionLabel from_one_hot(std::span<const double> encoded);
  /// "summer residential", "winter industrial", ...; "fall" is the canonical autumn name.
  static ConditionLabel parse(std::string_view text);
  std::string name() const;

  friend bool operator==(const ConditionLabel&, const ConditionLabel&) = default;
};

inline constexpr std::size_t kLabelCount = kSeasonCount * kTypeCount;

struct RawSeries {
  std::vector<double> values;  // MW, hourly
  Timestamp start{};
  std::string load_id;
};

struct RawWeek {
  std::vector<double> values;
  Date week_start{};
};

struct NormalizedWeek {
  std::vector<double> values;
  double weekly_mean = 0.0;
};

struct LoadProfile {
  std::vector<double> values;  // unitless, mean 1 over the week
  double weekly_mean = 0.0;    // MW
  Date week_start{};
  std::string load_id;
};

struct ScaleRecord {
  double min = 0.0;
  double max = 1.0;

  double transform(double x) const { return (x - min) / (max - min); }
  double inverse(double x) const { return x * (max - min) + min; }
};

struct ScaledMatrix {
  std::vector<double> values;
  ScaleRecord scale;
};

struct ProfileMeta {
  std::string load_id;
  Date week_start{};
  double weekly_mean = 0.0;
};

/// N profiles scaled into [0, 1], with their labels and origin.
struct Corpus {
  std::vector<double> profiles;  // row-major N x 168
  std::vector<ConditionLabel> labels;
  ScaleRecord scale;
  std::vector<ProfileMeta> meta;

  std::size_t rows() const { return labels.size(); }
  std::span<const double> profile(std::size_t row) const {
    return {profiles.data() + row * kHoursPerWeek, kHoursPerWeek};
  }
  /// N x 6 one-hot rows.
  std::vector<double> label_matrix() const;
  /// Subset of rows, keeping the scale record.
  Corpus select(std::span<const std::size_t> rows) const;
  std::vector<std::size_t> rows_with(ConditionLabel label) const;
};

NormalizedWeek normalize_weekly(std::span<const double> raw_week);

ScaledMatrix minmax_fit_transform(std::span<const double> matrix);
std::vector<double> minmax_inverse_transform(std::span<const double> scaled, const ScaleRecord& scale);

/// Consecutive 168-hour windows starting at the first Monday 00:00.
std::vector<RawWeek> segment_weeks(const RawSeries& series);

/// Meteorological season of the month the week starts in.
Season season_of(Date week_start);
std::array<double, kSeasonCount> season_one_hot(Date week_start);

/// Segment and normalize every series into weekly profiles.
std::vector<LoadProfile> profiles_from_series(std::span<const RawSeries> series);

/// Label, min-max scale and pack weekly profiles into a corpus. Every load id
/// present in `profiles` must appear in `types`.
Corpus assemble_corpus(std::span<const LoadProfile> profiles, const std::map<std::string, LoadType>& types);

/// Weekly-normalized (mean 1) values of a corpus row.
std::vector<double> unscaled_profile(const Corpus& corpus, std::size_t row);

}  // namespace loadgan::corpus
