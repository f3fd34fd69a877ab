#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "loadgan/dsp.hpp"
#include "loadgan/error.hpp"
#include "loadgan/eval/forecast.hpp"
#include "loadgan/eval/psd.hpp"
#include "loadgan/eval/wasserstein.hpp"
#include "loadgan/random.hpp"

using namespace loadgan;
using namespace loadgan::eval;

namespace {

std::vector<double> normal_sample(std::size_t n, double mu, double sigma, Rng& rng) {
  std::normal_distribution<double> g(mu, sigma);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

// Minimum mean cost over every perfect matching of two equal-size samples.
double brute_force_w1(std::vector<double> a, const std::vector<double>& b) {
  std::sort(a.begin(), a.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cost += std::abs(a[i] - b[i]);
    best = std::min(best, cost / static_cast<double>(a.size()));
  } while (std::next_permutation(a.begin(), a.end()));
  return best;
}

std::vector<double> repeat_each(const std::vector<double>& v, std::size_t times) {
  std::vector<double> out;
  for (double x : v) out.insert(out.end(), times, x);
  return out;
}

}  // namespace

TEST(Wasserstein, MatchesBruteForceAssignment) {
  Rng rng = make_rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = normal_sample(7, 0.0, 1.0, rng);
    const auto b = normal_sample(7, 0.5, 2.0, rng);
    EXPECT_NEAR(wasserstein1(a, b), brute_force_w1(a, b), 1e-12);
  }
}

TEST(Wasserstein, UnequalSizesMatchReplicatedSamples) {
  Rng rng = make_rng(4);
  const auto a = normal_sample(3, 0.0, 1.0, rng);
  const auto b = normal_sample(4, 1.0, 1.0, rng);
  auto ra = repeat_each(a, 4);
  auto rb = repeat_each(b, 3);
  std::sort(ra.begin(), ra.end());
  std::sort(rb.begin(), rb.end());
  double sorted_cost = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) sorted_cost += std::abs(ra[i] - rb[i]);
  EXPECT_NEAR(wasserstein1(a, b), sorted_cost / 12.0, 1e-12);
}

TEST(Wasserstein, MetricProperties) {
  Rng rng = make_rng(5);
  const auto a = normal_sample(200, 0.0, 1.0, rng);
  const auto b = normal_sample(150, 0.3, 1.5, rng);
  const auto c = normal_sample(90, -0.4, 0.7, rng);
  EXPECT_EQ(wasserstein1(a, a), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein1(a, b), wasserstein1(b, a));
  EXPECT_LE(wasserstein1(a, c), wasserstein1(a, b) + wasserstein1(b, c) + 1e-12);
  EXPECT_GT(wasserstein1(a, b), 0.0);
}

TEST(Wasserstein, TranslationAndScaling) {
  Rng rng = make_rng(6);
  const auto a = normal_sample(100, 0.0, 1.0, rng);
  const auto b = normal_sample(80, 1.0, 0.5, rng);
  auto shifted = a;
  for (double& x : shifted) x += 2.5;
  EXPECT_NEAR(wasserstein1(shifted, a), 2.5, 1e-12);
  auto sa = a, sb = b;
  for (double& x : sa) x *= 3.0;
  for (double& x : sb) x *= 3.0;
  EXPECT_NEAR(wasserstein1(sa, sb), 3.0 * wasserstein1(a, b), 1e-10);
}

TEST(Wasserstein, OrderInvariant) {
  Rng rng = make_rng(7);
  auto a = normal_sample(50, 0.0, 1.0, rng);
  const auto b = normal_sample(40, 0.2, 1.0, rng);
  const double before = wasserstein1(a, b);
  std::reverse(a.begin(), a.end());
  EXPECT_EQ(wasserstein1(a, b), before);
}

TEST(Wasserstein, Errors) {
  const std::vector<double> empty, one = {1.0}, bad = {std::nan("")};
  try {
    wasserstein1(empty, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
  try {
    wasserstein1(one, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NumericError);
  }
}

TEST(Wasserstein, PerColumn) {
  const std::vector<double> a = {0, 10, 1, 11}, b = {0, 12, 1, 13};
  const auto w = wasserstein1_per_column(a, b, 2);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_DOUBLE_EQ(w[0], 0.0);
  EXPECT_DOUBLE_EQ(w[1], 2.0);
}

TEST(Histogram, CountsAndClamping) {
  const std::vector<double> v = {-1.0, 0.0, 0.1, 0.5, 0.99, 1.0, 7.0};
  const auto h = histogram(v, 4, 0.0, 1.0);
  ASSERT_EQ(h.edges.size(), 5u);
  EXPECT_EQ(h.total, v.size());
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{3, 0, 1, 3}));
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}), v.size());
}

TEST(Spectrum, ParsevalHolds) {
  Rng rng = make_rng(8);
  for (std::size_t n : {168u, 167u, 24u}) {
    const auto x = normal_sample(n, 2.0, 1.3, rng);
    const auto p = dsp::one_sided_periodogram(x);
    ASSERT_EQ(p.size(), n / 2 + 1);
    const double mu = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mu) * (v - mu);
    var /= static_cast<double>(n);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), var, 1e-9);
    EXPECT_NEAR(p[0], 0.0, 1e-20);
  }
}

TEST(Spectrum, PureToneLandsInItsBin) {
  std::vector<double> x(168);
  for (std::size_t t = 0; t < 168; ++t) x[t] = 5.0 + std::cos(2.0 * std::numbers::pi * 7.0 * static_cast<double>(t) / 168.0);
  const auto s = ensemble_psd(x);
  EXPECT_EQ(dominant_bin(s), 7u);
  EXPECT_NEAR(s.frequencies[7], 1.0 / 24.0, 1e-15);
  EXPECT_NEAR(s.power[7], 0.5, 1e-12);
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    if (k != 7) EXPECT_LT(s.power[k], 1e-20);
  }
}

TEST(Spectrum, WhiteNoiseIsFlat) {
  Rng rng = make_rng(9);
  const std::size_t n = 168, rows = 10000;
  const auto x = normal_sample(n * rows, 0.0, 1.0, rng);
  const auto s = ensemble_psd(x, n);
  EXPECT_EQ(s.profiles, rows);
  const double expected = 2.0 / static_cast<double>(n);
  for (std::size_t k = 1; k < n / 2; ++k) EXPECT_NEAR(s.power[k] / expected, 1.0, 0.10) << k;
}

TEST(Spectrum, DisjointFrequencySetsPeakApart) {
  const auto tones = [](std::initializer_list<double> periods) {
    std::vector<double> x;
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t t = 0; t < 168; ++t) {
        double v = 0.0;
        for (double p : periods) v += std::sin(2.0 * std::numbers::pi * static_cast<double>(t + r) / p);
        x.push_back(v);
      }
    }
    return x;
  };
  const auto daily = ensemble_psd(tones({24.0, 12.0}));
  const auto weekly = ensemble_psd(tones({168.0, 56.0}));
  EXPECT_EQ(dominant_bin(daily), 7u);
  EXPECT_EQ(dominant_bin(weekly), 1u);
  EXPECT_EQ(compare_psd(tones({24.0}), tones({168.0})).synthetic_peak_bin, 1u);
}

TEST(Spectrum, DiurnalBins) {
  const auto bins = diurnal_bins(168);
  ASSERT_EQ(bins.size(), 12u);
  EXPECT_EQ(bins.front(), 7u);
  EXPECT_EQ(bins.back(), 84u);
}

TEST(Spectrum, ComparisonOfIdenticalEnsembles) {
  Rng rng = make_rng(10);
  const auto x = normal_sample(168 * 10, 1.0, 0.2, rng);
  const auto c = compare_psd(x, x);
  for (double d : c.log_power_difference) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(c.max_abs_diurnal_difference, 0.0);
  EXPECT_EQ(c.real_peak_bin, c.synthetic_peak_bin);
  auto doubled = x;
  for (double& v : doubled) v *= 2.0;
  const auto d = compare_psd(x, doubled);
  for (std::size_t k = 1; k < d.log_power_difference.size(); ++k)
    EXPECT_NEAR(d.log_power_difference[k], std::log(4.0), 1e-9);
  const auto csv = spectrum_csv(ensemble_psd(x));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "freq_cph,power");
}

TEST(Forecast, WindowCount) {
  EXPECT_EQ(windows_per_profile(168, 48), 120u);
  EXPECT_EQ(windows_per_profile(168, 48, 4), 30u);
  EXPECT_EQ(windows_per_profile(10, 9), 1u);
}

TEST(Forecast, PercentageErrorReport) {
  const std::vector<double> pred = {1.1, 0.9, 0.06, 2.0}, target = {1.0, 1.0, 0.01, 2.0};
  const auto r = percentage_error_report(pred, target);
  // 10, 10, 100 |0.06 - 0.01| / 0.05 = 100, 0
  EXPECT_EQ(r.count, 4u);
  EXPECT_NEAR(r.mean, 30.0, 1e-9);
  const double var = (400.0 + 400.0 + 4900.0 + 900.0) / 4.0;
  EXPECT_NEAR(r.std_dev, std::sqrt(var), 1e-9);
  const std::vector<double> pred_r(pred.rbegin(), pred.rend()), target_r(target.rbegin(), target.rend());
  const auto rr = percentage_error_report(pred_r, target_r);
  EXPECT_EQ(rr.mean, r.mean);
  EXPECT_EQ(rr.std_dev, r.std_dev);
}

TEST(Forecast, PerfectPredictionsScoreZero) {
  const std::vector<double> y = {0.2, 1.4, 0.01, 3.0};
  const auto r = percentage_error_report(y, y);
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(r.std_dev, 0.0);
  EXPECT_EQ(r.count, 4u);
}

TEST(Forecast, ConstantProfilesArePredicted) {
  ForecastConfig cfg;
  cfg.hidden = 8;
  cfg.layers = 1;
  cfg.window = 24;
  cfg.window_stride = 8;
  cfg.epochs = 40;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-2;
  const std::vector<double> profiles(6 * 168, 0.6);
  const auto model = train_forecaster(profiles, cfg);
  const auto report = forecast_eval(model, profiles, corpus::ScaleRecord{0.0, 2.0});
  EXPECT_LT(report.mean, 1.0);

  const auto bytes = [](const Forecaster& m) { return nn::serialize(forecaster_checkpoint(m)); };
  EXPECT_EQ(bytes(train_forecaster(profiles, cfg)), bytes(model));
  auto other = cfg;
  other.seed = cfg.seed + 1;
  EXPECT_NE(bytes(train_forecaster(profiles, other)), bytes(model));
}

TEST(Forecast, LearnsAndRoundTrips) {
  ForecastConfig cfg;
  cfg.hidden = 8;
  cfg.layers = 2;
  cfg.window = 24;
  cfg.window_stride = 4;
  cfg.epochs = 15;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-2;
  std::vector<double> profiles;
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t t = 0; t < 168; ++t) {
      profiles.push_back(0.5 + 0.3 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t + 3 * r) / 24.0));
    }
  }
  std::vector<double> losses;
  const auto model = train_forecaster(profiles, cfg, [&](std::size_t, double loss) { losses.push_back(loss); });
  ASSERT_EQ(losses.size(), cfg.epochs);
  EXPECT_LT(losses.back(), 0.5 * losses.front());

  const corpus::ScaleRecord scale{0.0, 2.0};
  const auto report = forecast_eval(model, profiles, scale);
  EXPECT_EQ(report.count, 8u * windows_per_profile(168, 24));
  EXPECT_TRUE(std::isfinite(report.mean));

  const auto restored = forecaster_from_checkpoint(nn::deserialize(nn::serialize(forecaster_checkpoint(model))));
  EXPECT_EQ(restored.window(), 24u);
  const std::span<const double> windows(profiles.data(), 48);
  EXPECT_EQ(restored.predict(windows), model.predict(windows));

  const auto again = train_forecaster(profiles, cfg);
  EXPECT_EQ(again.predict(windows), model.predict(windows));
}

TEST(Forecast, ConfigValidation) {
  ForecastConfig cfg;
  cfg.window = 168;
  try {
    cfg.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadConfig);
  }
  const auto parsed = ForecastConfig::from_key_values({{"forecast_hidden", "16"}, {"forecast_window_stride", "3"}});
  EXPECT_EQ(parsed.hidden, 16u);
  EXPECT_EQ(parsed.window_stride, 3u);
}
