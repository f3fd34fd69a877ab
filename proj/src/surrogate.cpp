#include "loadgan/surrogate.hpp"

#include <cmath>
#include <numbers>

#include "loadgan/error.hpp"
#include "loadgan/kv_config.hpp"
#include "loadgan/random.hpp"

namespace loadgan::corpus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Diurnal shape per season: 24 h and 12 h cosine components (amplitude,
// phase in hours). Winter and fall carry a strong 12 h term, which produces
// the morning and evening double peak; summer is one large daytime hump.
struct ResidentialShape {
  double a24, phase24, a12, phase12;
};
constexpr ResidentialShape kResidential[kSeasonCount] = {
    {0.20, 15.0, 0.15, 8.5},   // winter
    {0.13, 15.0, 0.05, 3.0},   // spring
    {0.36, 16.0, 0.08, 4.0},   // summer
    {0.15, 15.5, 0.10, 8.0},   // fall
};

// Industrial loads: weak diurnal cycle riding on a piecewise-constant level,
// with reduced weekend production.
struct IndustrialShape {
  double a24, step_spread;
};
constexpr IndustrialShape kIndustrial[kSeasonCount] = {
    {0.03, 0.10},  // winter
    {0.05, 0.20},  // spring
    {0.08, 0.28},  // summer
    {0.04, 0.15},  // fall
};

constexpr double kNoisePersistence = 0.8;
constexpr double kWeekendDamping = 0.75;
constexpr double kWeekendLevel = 0.95;

std::string load_name(std::size_t index) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "L%02zu", index + 1);
  return buffer;
}

}  // namespace

void SurrogateConfig::validate() const {
  if (loads < 2) fail(ErrorCode::BadConfig, "surrogate corpus needs loads >= 2");
  if (weeks < 1) fail(ErrorCode::BadConfig, "surrogate corpus needs weeks >= 1");
  if (!(noise_sigma >= 0.0) || noise_sigma > 0.5) fail(ErrorCode::BadConfig, "noise_sigma must lie in [0, 0.5]");
  if (!(step_rate >= 0.0) || step_rate > 1.0) fail(ErrorCode::BadConfig, "step_rate must lie in [0, 1]");
}

SurrogateConfig SurrogateConfig::from_key_values(const std::map<std::string, std::string>& values) {
  SurrogateConfig c;
  c.loads = config::get_size(values, "loads", c.loads);
  c.weeks = config::get_size(values, "weeks", c.weeks);
  c.noise_sigma = config::get_double(values, "noise_sigma", c.noise_sigma);
  c.step_rate = config::get_double(values, "step_rate", c.step_rate);
  c.seed = config::get_u64(values, "seed", c.seed);
  c.validate();
  return c;
}

SurrogateCorpus make_surrogate_corpus(const SurrogateConfig& config) {
  config.validate();
  const Date start = make_date(2017, 1, 2);  // a Monday
  const std::size_t hours = config.weeks * kHoursPerWeek;

  SurrogateCorpus out;
  for (std::size_t load = 0; load < config.loads; ++load) {
    Rng rng = make_rng(config.seed, load);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const bool residential = load % 2 == 0;
    const double amplitude = 0.9 + 0.2 * unit(rng);
    const double phase_shift = -0.75 + 1.5 * unit(rng);
    const double base_mw = 40.0 + 160.0 * unit(rng);
    const double production_cut = 0.75 + 0.15 * unit(rng);

    RawSeries series;
    series.load_id = load_name(load);
    series.start = Timestamp{start};
    series.values.resize(hours);

    double noise = 0.0;
    double level = 1.0;
    for (std::size_t t = 0; t < hours; ++t) {
      const std::size_t week = t / kHoursPerWeek;
      const Date week_start = start + std::chrono::days{static_cast<long>(week) * 7};
      const auto season = static_cast<std::size_t>(season_of(week_start));
      const std::size_t hour_in_week = t % kHoursPerWeek;
      const double hour = static_cast<double>(hour_in_week % 24) + phase_shift;
      const bool weekend = hour_in_week >= 5 * 24;

      double shape = 1.0;
      if (residential) {
        const auto& s = kResidential[season];
        double daily = s.a24 * std::cos(kTwoPi * (hour - s.phase24) / 24.0) +
                       s.a12 * std::cos(kTwoPi * (hour - s.phase12) / 12.0);
        daily *= amplitude;
        if (weekend) daily *= kWeekendDamping;
        shape = (weekend ? kWeekendLevel : 1.0) + daily;
      } else {
        const auto& s = kIndustrial[season];
        if (unit(rng) < config.step_rate || t == 0) {
          level = 1.0 + s.step_spread * (2.0 * unit(rng) - 1.0);
        }
        shape = (weekend ? production_cut : 1.0) * level * (1.0 + amplitude * s.a24 * std::cos(kTwoPi * (hour - 13.0) / 24.0));
      }
      noise = kNoisePersistence * noise + config.noise_sigma * gauss(rng);
      series.values[t] = base_mw * std::max(0.05, shape * (1.0 + noise));
    }
    out.true_types[series.load_id] = residential ? LoadType::Residential : LoadType::Industrial;
    out.series.push_back(std::move(series));
  }
  const auto profiles = profiles_from_series(out.series);
  out.corpus = assemble_corpus(profiles, out.true_types);
  return out;
}

}  // namespace loadgan::corpus
