#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "loadgan/corpus.hpp"
#include "loadgan/nn/checkpoint.hpp"
#include "loadgan/nn/layers.hpp"

namespace loadgan::eval {

struct ForecastConfig {
  std::size_t hidden = 48;
  std::size_t layers = 3;
  std::size_t window = 48;
  /// Offset between consecutive training windows of a profile; evaluation
  /// always uses every window.
  std::size_t window_stride = 1;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 48;

  void validate() const;
  static ForecastConfig from_key_values(const std::map<std::string, std::string>& values);
};

/// Sliding windows per profile of `length` samples: length - window targets.
std::size_t windows_per_profile(std::size_t length, std::size_t window, std::size_t stride = 1);

/// Stacked LSTM over a scalar series with a dense head on the last hidden state.
class Forecaster {
 public:
  Forecaster(const ForecastConfig& config, Rng& rng);
  Forecaster(std::vector<nn::Layer> layers, std::size_t window);

  std::size_t window() const { return window_; }
  /// windows [B, window] -> [B, 1].
  nn::Tensor forward(const nn::Tensor& windows) const;
  std::vector<double> predict(std::span<const double> windows) const;

  const std::vector<nn::Layer>& layers() const { return layers_; }
  std::vector<nn::Tensor> parameters() const { return nn::collect_parameters(layers_); }

 private:
  std::vector<nn::Layer> layers_;
  std::size_t window_;
};

/// Training inputs are scaled [0, 1] profiles, row-major with 168 columns.
/// `on_epoch` receives the epoch index and mean training loss.
Forecaster train_forecaster(std::span<const double> profiles, const ForecastConfig& config,
                            const std::function<void(std::size_t, double)>& on_epoch = {});

struct ForecastReport {
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t count = 0;
};

/// Percentage error 100 |yhat - y| / max(y, 0.05) per window, with both values
/// mapped back through `scale` into weekly-normalized units.
ForecastReport forecast_eval(const Forecaster& model, std::span<const double> profiles,
                             const corpus::ScaleRecord& scale);
/// Same statistic from explicit predictions and targets (normalized units).
ForecastReport percentage_error_report(std::span<const double> predictions, std::span<const double> targets);

/// Model block "forecaster" plus the window length in the metadata.
nn::Checkpoint forecaster_checkpoint(const Forecaster& model);
Forecaster forecaster_from_checkpoint(const nn::Checkpoint& checkpoint);

}  // namespace loadgan::eval
