#include "loadgan/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "loadgan/error.hpp"

namespace loadgan::corpus {

namespace {

int parse_int_field(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::ParseError, "bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Date make_date(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) {
    fail(ErrorCode::ParseError, "invalid calendar date");
  }
  return Date{ymd};
}

std::string format_date(Date date) {
  std::chrono::year_month_day ymd{date};
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buffer;
}

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    fail(ErrorCode::ParseError, "expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  const int year = parse_int_field(text.substr(0, 4), "year");
  const int month = parse_int_field(text.substr(5, 2), "month");
  const int day = parse_int_field(text.substr(8, 2), "day");
  return make_date(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
}

Timestamp parse_timestamp(std::string_view text) {
  if (text.size() < 16 || (text[10] != ' ' && text[10] != 'T') || text[13] != ':') {
    fail(ErrorCode::ParseError, "expected 'YYYY-MM-DD HH:MM', got '" + std::string(text) + "'");
  }
  const Date day = parse_date(text.substr(0, 10));
  const int hour = parse_int_field(text.substr(11, 2), "hour");
  const int minute = parse_int_field(text.substr(14, 2), "minute");
  if (hour < 0 || hour > 23 || minute != 0) {
    fail(ErrorCode::ParseError, "timestamp must fall on the hour: '" + std::string(text) + "'");
  }
  return Timestamp{day} + std::chrono::hours{hour};
}

std::string_view season_name(Season season) {
  switch (season) {
    case Season::Winter: return "winter";
    case Season::Spring: return "spring";
    case Season::Summer: return "summer";
    case Season::Fall: return "fall";
  }
  return "winter";
}

std::string_view type_name(LoadType type) {
  return type == LoadType::Residential ? "residential" : "industrial";
}

Season parse_season(std::string_view name) {
  const std::string key = lower(name);
  for (Season s : {Season::Winter, Season::Spring, Season::Summer, Season::Fall}) {
    if (key == season_name(s)) return s;
  }
  fail(ErrorCode::UnknownLabel, "unknown season '" + std::string(name) + "'");
}

LoadType parse_type(std::string_view name) {
  const std::string key = lower(name);
  if (key == "residential") return LoadType::Residential;
  if (key == "industrial") return LoadType::Industrial;
  fail(ErrorCode::UnknownLabel, "unknown load type '" + std::string(name) + "'");
}

std::array<double, kLabelWidth> ConditionLabel::one_hot() const {
  std::array<double, kLabelWidth> out{};
  out[static_cast<std::size_t>(season)] = 1.0;
  out[kSeasonCount + static_cast<std::size_t>(type)] = 1.0;
  return out;
}

ConditionLabel ConditionLabel::from_index(std::size_t index) {
  if (index >= kLabelCount) {
    fail(ErrorCode::UnknownLabel, "label index out of range");
  }
  return {static_cast<Season>(index / kTypeCount), static_cast<LoadType>(index % kTypeCount)};
}

ConditionLabel ConditionLabel::from_one_hot(std::span<const double> encoded) {
  if (encoded.size() != kLabelWidth) {
    fail(ErrorCode::ShapeMismatch, "label must have 6 entries");
  }
  auto hot_index = [&](std::size_t first, std::size_t count) {
    std::size_t hot = count;
    for (std::size_t i = 0; i < count; ++i) {
      const double v = encoded[first + i];
      if (v == 1.0) {
        if (hot != count) fail(ErrorCode::UnknownLabel, "label sub-vector has more than one 1");
        hot = i;
      } else if (v != 0.0) {
        fail(ErrorCode::UnknownLabel, "label entries must be 0 or 1");
      }
    }
    if (hot == count) fail(ErrorCode::UnknownLabel, "label sub-vector has no 1");
    return hot;
  };
  return {static_cast<Season>(hot_index(0, kSeasonCount)), static_cast<LoadType>(hot_index(kSeasonCount, kTypeCount))};
}

ConditionLabel ConditionLabel::parse(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (c == ' ' || c == '_' || c == '-' || c == ',' || c == '/') {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  if (words.size() != 2) {
    fail(ErrorCode::UnknownLabel, "label must be '<season> <type>', got '" + std::string(text) + "'");
  }
  return {parse_season(words[0]), parse_type(words[1])};
}

std::string ConditionLabel::name() const {
  return std::string(season_name(season)) + " " + std::string(type_name(type));
}

std::vector<double> Corpus::label_matrix() const {
  std::vector<double> out;
  out.reserve(labels.size() * kLabelWidth);
  for (const auto& label : labels) {
    const auto hot = label.one_hot();
    out.insert(out.end(), hot.begin(), hot.end());
  }
  return out;
}

Corpus Corpus::select(std::span<const std::size_t> rows) const {
  Corpus out;
  out.scale = scale;
  out.profiles.reserve(rows.size() * kHoursPerWeek);
  for (std::size_t row : rows) {
    const auto p = profile(row);
    out.profiles.insert(out.profiles.end(), p.begin(), p.end());
    out.labels.push_back(labels[row]);
    out.meta.push_back(meta[row]);
  }
  return out;
}

std::vector<std::size_t> Corpus::rows_with(ConditionLabel label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(i);
  }
  return out;
}

NormalizedWeek normalize_weekly(std::span<const double> raw_week) {
  if (raw_week.size() != kHoursPerWeek) {
    fail(ErrorCode::ShapeMismatch, "a week has 168 hourly values");
  }
  double sum = 0.0;
  for (double v : raw_week) {
    if (!std::isfinite(v)) fail(ErrorCode::DegenerateWeek, "non-finite load value");
    sum += v;
  }
  const double mean = sum / static_cast<double>(kHoursPerWeek);
  if (!(mean > 0.0)) {
    fail(ErrorCode::DegenerateWeek, "weekly mean must be positive");
  }
  NormalizedWeek out;
  out.weekly_mean = mean;
  out.values.resize(kHoursPerWeek);
  std::transform(raw_week.begin(), raw_week.end(), out.values.begin(), [mean](double v) { return v / mean; });
  return out;
}

ScaledMatrix minmax_fit_transform(std::span<const double> matrix) {
  if (matrix.empty()) {
    fail(ErrorCode::EmptyInput, "cannot scale an empty matrix");
  }
  const auto [lo, hi] = std::minmax_element(matrix.begin(), matrix.end());
  if (!(*hi > *lo)) {
    fail(ErrorCode::DegenerateRange, "matrix has no spread (max == min)");
  }
  ScaledMatrix out;
  out.scale = {*lo, *hi};
  out.values.resize(matrix.size());
  std::transform(matrix.begin(), matrix.end(), out.values.begin(),
                 [&](double v) { return out.scale.transform(v); });
  return out;
}

std::vector<double> minmax_inverse_transform(std::span<const double> scaled, const ScaleRecord& scale) {
  std::vector<double> out(scaled.size());
  std::transform(scaled.begin(), scaled.end(), out.begin(), [&](double v) { return scale.inverse(v); });
  return out;
}

std::vector<RawWeek> segment_weeks(const RawSeries& series) {
  using std::chrono::days;
  using std::chrono::floor;
  using std::chrono::hours;

  const Date first_day = floor<days>(series.start);
  const auto hour_of_day = (series.start - Timestamp{first_day}).count();
  // Days until next Monday (0 if today is Monday); a Monday that started
  // mid-day is not usable.
  const unsigned weekday = std::chrono::weekday{first_day}.iso_encoding();  // Mon = 1
  long offset_days = (8 - static_cast<long>(weekday)) % 7;
  if (offset_days == 0 && hour_of_day != 0) offset_days = 7;
  const long offset = offset_days * 24 - static_cast<long>(hour_of_day);

  std::vector<RawWeek> weeks;
  if (offset < 0 || series.values.size() < static_cast<std::size_t>(offset) + kHoursPerWeek) {
    fail(ErrorCode::TooShort, "series '" + series.load_id + "' has no complete Monday-aligned week");
  }
  const Date first_monday = first_day + days{offset_days};
  for (std::size_t begin = static_cast<std::size_t>(offset); begin + kHoursPerWeek <= series.values.size();
       begin += kHoursPerWeek) {
    RawWeek week;
    week.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(begin),
                       series.values.begin() + static_cast<std::ptrdiff_t>(begin + kHoursPerWeek));
    week.week_start = first_monday + days{static_cast<long>(weeks.size()) * 7};
    weeks.push_back(std::move(week));
  }
  return weeks;
}

Season season_of(Date week_start) {
  const unsigned month = static_cast<unsigned>(std::chrono::year_month_day{week_start}.month());
  if (month == 12 || month <= 2) return Season::Winter;
  if (month <= 5) return Season::Spring;
  if (month <= 8) return Season::Summer;
  return Season::Fall;
}

std::array<double, kSeasonCount> season_one_hot(Date week_start) {
  std::array<double, kSeasonCount> out{};
  out[static_cast<std::size_t>(season_of(week_start))] = 1.0;
  return out;
}

std::vector<LoadProfile> profiles_from_series(std::span<const RawSeries> series) {
  std::vector<LoadProfile> out;
  for (const auto& s : series) {
    for (auto& week : segment_weeks(s)) {
      auto normalized = normalize_weekly(week.values);
      out.push_back({std::move(normalized.values), normalized.weekly_mean, week.week_start, s.load_id});
    }
  }
  return out;
}

Corpus assemble_corpus(std::span<const LoadProfile> profiles, const std::map<std::string, LoadType>& types) {
  if (profiles.empty()) {
    fail(ErrorCode::EmptyInput, "no profiles to assemble");
  }
  std::vector<double> flat;
  flat.reserve(profiles.size() * kHoursPerWeek);
  Corpus corpus;
  for (const auto& p : profiles) {
    if (p.values.size() != kHoursPerWeek) {
      fail(ErrorCode::ShapeMismatch, "profile of load '" + p.load_id + "' is not 168 long");
    }
    const auto type = types.find(p.load_id);
    if (type == types.end()) {
      fail(ErrorCode::BadConfig, "no load type for load '" + p.load_id + "'");
    }
    flat.insert(flat.end(), p.values.begin(), p.values.end());
    corpus.labels.push_back({season_of(p.week_start), type->second});
    corpus.meta.push_back({p.load_id, p.week_start, p.weekly_mean});
  }
  auto scaled = minmax_fit_transform(flat);
  corpus.profiles = std::move(scaled.values);
  corpus.scale = scaled.scale;
  return corpus;
}

std::vector<double> unscaled_profile(const Corpus& corpus, std::size_t row) {
  return minmax_inverse_transform(corpus.profile(row), corpus.scale);
}

}  // namespace loadgan::corpus
