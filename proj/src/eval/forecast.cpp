#include "loadgan/eval/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loadgan/error.hpp"
#include "loadgan/kv_config.hpp"
#include "loadgan/nn/adam.hpp"
#include "loadgan/nn/ops.hpp"
#include "loadgan/random.hpp"

namespace loadgan::eval {

using corpus::kHoursPerWeek;
using nn::Tensor;

namespace {

constexpr double kErrorFloor = 0.05;
constexpr std::size_t kPredictChunk = 2048;

struct WindowRef {
  std::size_t row;
  std::size_t start;
};

void check_profiles(std::span<const double> profiles) {
  if (profiles.empty()) fail(ErrorCode::EmptyInput, "forecasting needs at least one profile");
  if (profiles.size() % kHoursPerWeek != 0) fail(ErrorCode::ShapeMismatch, "profiles must have 168 columns");
}

std::vector<WindowRef> windows_of(std::size_t rows, std::size_t window, std::size_t stride) {
  std::vector<WindowRef> refs;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t + window < kHoursPerWeek; t += stride) refs.push_back({r, t});
  }
  return refs;
}

void gather(std::span<const double> profiles, std::span<const WindowRef> refs, std::size_t window,
            std::vector<double>& inputs, std::vector<double>& targets) {
  inputs.resize(refs.size() * window);
  targets.resize(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const double* p = profiles.data() + refs[i].row * kHoursPerWeek + refs[i].start;
    std::copy(p, p + window, inputs.begin() + static_cast<long>(i * window));
    targets[i] = p[window];
  }
}

}  // namespace

void ForecastConfig::validate() const {
  if (hidden == 0 || layers == 0) fail(ErrorCode::BadConfig, "forecaster needs hidden >= 1 and layers >= 1");
  if (window == 0 || window >= kHoursPerWeek) fail(ErrorCode::BadConfig, "forecaster window must lie in [1, 167]");
  if (window_stride == 0) fail(ErrorCode::BadConfig, "forecast window_stride must be >= 1");
  if (epochs == 0 || batch_size == 0) fail(ErrorCode::BadConfig, "forecaster needs epochs >= 1 and batch_size >= 1");
  if (!(learning_rate > 0.0)) fail(ErrorCode::BadConfig, "forecaster learning_rate must be positive");
}

ForecastConfig ForecastConfig::from_key_values(const std::map<std::string, std::string>& values) {
  ForecastConfig c;
  c.hidden = config::get_size(values, "forecast_hidden", c.hidden);
  c.layers = config::get_size(values, "forecast_layers", c.layers);
  c.window = config::get_size(values, "forecast_window", c.window);
  c.window_stride = config::get_size(values, "forecast_window_stride", c.window_stride);
  c.epochs = config::get_size(values, "forecast_epochs", c.epochs);
  c.batch_size = config::get_size(values, "forecast_batch_size", c.batch_size);
  c.learning_rate = config::get_double(values, "forecast_learning_rate", c.learning_rate);
  c.seed = config::get_u64(values, "forecast_seed", c.seed);
  c.validate();
  return c;
}

std::size_t windows_per_profile(std::size_t length, std::size_t window, std::size_t stride) {
  if (stride == 0) fail(ErrorCode::BadConfig, "stride must be >= 1");
  if (length <= window) return 0;
  return (length - window - 1) / stride + 1;
}

Forecaster::Forecaster(const ForecastConfig& config, Rng& rng) : window_(config.window) {
  config.validate();
  std::size_t in = 1;
  for (std::size_t l = 0; l < config.layers; ++l) {
    layers_.emplace_back(nn::LayerSpec::lstm(in, config.hidden), rng);
    in = config.hidden;
  }
  layers_.emplace_back(nn::LayerSpec::dense(config.hidden, 1, nn::Activation::None), rng);
}

Forecaster::Forecaster(std::vector<nn::Layer> layers, std::size_t window) : layers_(std::move(layers)), window_(window) {
  bool ok = layers_.size() >= 2 && layers_.back().spec().kind == nn::LayerKind::Dense && layers_.back().spec().out == 1 &&
            layers_.front().spec().kind == nn::LayerKind::Lstm && layers_.front().spec().in == 1 && window_ > 0;
  for (std::size_t l = 1; ok && l + 1 < layers_.size(); ++l) {
    ok = layers_[l].spec().kind == nn::LayerKind::Lstm && layers_[l].spec().in == layers_[l - 1].spec().out;
  }
  if (ok) ok = layers_.back().spec().in == layers_[layers_.size() - 2].spec().out;
  if (!ok) fail(ErrorCode::ShapeMismatch, "layers do not form a stacked-LSTM forecaster");
}

Tensor Forecaster::forward(const Tensor& windows) const {
  if (windows.rank() != 2 || windows.dim(1) != window_) {
    fail(ErrorCode::ShapeMismatch, "forecaster expects [B, " + std::to_string(window_) + "], got " +
                                       nn::shape_string(windows.shape()));
  }
  const std::size_t batch = windows.dim(0);
  const std::size_t stack = layers_.size() - 1;
  std::vector<nn::Layer::LstmState> states;
  for (std::size_t l = 0; l < stack; ++l) {
    const std::size_t h = layers_[l].spec().out;
    states.push_back({Tensor::zeros({batch, h}), Tensor::zeros({batch, h})});
  }
  for (std::size_t t = 0; t < window_; ++t) {
    Tensor x = nn::slice_columns(windows, t, 1);
    for (std::size_t l = 0; l < stack; ++l) {
      states[l] = layers_[l].step(x, states[l]);
      x = states[l].h;
    }
  }
  return layers_.back().forward(states.back().h);
}

std::vector<double> Forecaster::predict(std::span<const double> windows) const {
  if (windows.size() % window_ != 0) fail(ErrorCode::ShapeMismatch, "window matrix has the wrong width");
  nn::NoGradGuard guard;
  const std::size_t n = windows.size() / window_;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t start = 0; start < n; start += kPredictChunk) {
    const std::size_t b = std::min(kPredictChunk, n - start);
    const auto chunk = windows.subspan(start * window_, b * window_);
    const Tensor y = forward(Tensor::from({b, window_}, std::vector<double>(chunk.begin(), chunk.end())));
    out.insert(out.end(), y.values().begin(), y.values().end());
  }
  return out;
}

Forecaster train_forecaster(std::span<const double> profiles, const ForecastConfig& config,
                            const std::function<void(std::size_t, double)>& on_epoch) {
  config.validate();
  check_profiles(profiles);
  Rng init = make_rng(config.seed, 0);
  Forecaster model(config, init);
  nn::AdamConfig adam_config;
  adam_config.learning_rate = config.learning_rate;
  adam_config.beta1 = 0.9;
  nn::Adam adam(model.parameters(), adam_config);

  auto refs = windows_of(profiles.size() / kHoursPerWeek, config.window, config.window_stride);
  std::vector<double> inputs, targets;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng = make_rng(config.seed, epoch + 1);
    std::shuffle(refs.begin(), refs.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < refs.size(); start += config.batch_size) {
      const std::size_t b = std::min(config.batch_size, refs.size() - start);
      gather(profiles, std::span<const WindowRef>(refs).subspan(start, b), config.window, inputs, targets);
      adam.zero_grad();
      const Tensor loss = nn::mse_loss(model.forward(Tensor::from({b, config.window}, inputs)), targets);
      loss.backward();
      adam.step();
      loss_sum += loss.item();
      ++batches;
    }
    if (on_epoch) on_epoch(epoch, loss_sum / static_cast<double>(batches));
  }
  return model;
}

ForecastReport percentage_error_report(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) fail(ErrorCode::ShapeMismatch, "prediction/target count mismatch");
  if (targets.empty()) fail(ErrorCode::EmptyInput, "no forecast windows to evaluate");
  std::vector<double> errors(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    errors[i] = 100.0 * std::abs(predictions[i] - targets[i]) / std::max(targets[i], kErrorFloor);
  }
  // Sorted accumulation makes the report independent of the window order.
  std::sort(errors.begin(), errors.end());
  const double n = static_cast<double>(errors.size());
  const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : errors) ss += (e - mean) * (e - mean);
  return {mean, std::sqrt(ss / n), errors.size()};
}

ForecastReport forecast_eval(const Forecaster& model, std::span<const double> profiles,
                             const corpus::ScaleRecord& scale) {
  check_profiles(profiles);
  const auto refs = windows_of(profiles.size() / kHoursPerWeek, model.window(), 1);
  std::vector<double> inputs, targets;
  gather(profiles, refs, model.window(), inputs, targets);
  auto predictions = model.predict(inputs);
  for (double& p : predictions) p = scale.inverse(p);
  for (double& t : targets) t = scale.inverse(t);
  return percentage_error_report(predictions, targets);
}

nn::Checkpoint forecaster_checkpoint(const Forecaster& model) {
  nn::Checkpoint ck;
  ck.meta["window"] = std::to_string(model.window());
  ck.models.push_back(nn::make_block("forecaster", model.layers()));
  return ck;
}

Forecaster forecaster_from_checkpoint(const nn::Checkpoint& checkpoint) {
  const auto it = checkpoint.meta.find("window");
  if (it == checkpoint.meta.end()) fail(ErrorCode::MissingSection, "forecaster checkpoint lacks the window length");
  return Forecaster(nn::layers_from_block(checkpoint.model("forecaster")), std::stoull(it->second));
}

}  // namespace loadgan::eval
