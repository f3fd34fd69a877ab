#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loadgan/corpus.hpp"
#include "loadgan/nn/adam.hpp"
#include "loadgan/nn/checkpoint.hpp"
#include "loadgan/nn/layers.hpp"

namespace loadgan::cgan {

inline constexpr std::size_t kNoiseDim = 25;
inline constexpr std::size_t kSeedLength = 21;
inline constexpr std::size_t kSeedChannels = 32;

/// noise + label -> FC 31-128-256-672 -> [32, 21] -> tconv x3 -> [168].
class Generator {
 public:
  static std::vector<nn::LayerSpec> specs();

  explicit Generator(Rng& rng);
  explicit Generator(std::vector<nn::Layer> layers);

  /// z [B, 25], y [B, 6] -> [B, 168], values in (0, 1).
  nn::Tensor forward(const nn::Tensor& z, const nn::Tensor& y) const;
  /// Shapes after each layer, starting with the joint input.
  static std::vector<nn::Shape> shape_trace(std::size_t batch);

  const std::vector<nn::Layer>& layers() const { return layers_; }
  std::vector<nn::Tensor> parameters() const { return nn::collect_parameters(layers_); }

 private:
  std::vector<nn::Layer> layers_;
};

/// profile -> conv x2 -> flatten, concat label -> FC 1350-512-256-1 sigmoid.
class Discriminator {
 public:
  static std::vector<nn::LayerSpec> specs();

  explicit Discriminator(Rng& rng);
  explicit Discriminator(std::vector<nn::Layer> layers);

  /// x [B, 168], y [B, 6] -> [B, 1].
  nn::Tensor forward(const nn::Tensor& x, const nn::Tensor& y) const;

  const std::vector<nn::Layer>& layers() const { return layers_; }
  std::vector<nn::Tensor> parameters() const { return nn::collect_parameters(layers_); }

 private:
  std::vector<nn::Layer> layers_;
};

struct TrainConfig {
  std::size_t epochs = 1200;
  std::size_t batch_size = 32;
  std::size_t d_steps_per_iter = 2;
  nn::AdamConfig generator_optimizer;
  nn::AdamConfig discriminator_optimizer{5e-5};
  double validation_fraction = 0.1;
  std::uint64_t seed = 2017;
  std::size_t checkpoint_every = 100;
  /// Both learning rates fall linearly from this fraction of the run to
  /// `lr_final_scale` times their initial value at the last epoch.
  double lr_decay_start = 0.5;
  double lr_final_scale = 0.02;

  /// Learning-rate multiplier applied during `epoch`.
  double lr_scale(std::size_t epoch) const;
  void validate() const;
  static TrainConfig from_key_values(const std::map<std::string, std::string>& values);
};

struct EpochTelemetry {
  std::size_t epoch = 0;
  double d_train = 0.0;
  double d_val = 0.0;
  double d_fake = 0.0;
  double w1 = 0.0;

  friend bool operator==(const EpochTelemetry&, const EpochTelemetry&) = default;
};

std::string telemetry_csv(const std::vector<EpochTelemetry>& telemetry);
std::vector<EpochTelemetry> parse_telemetry_csv(const std::string& text);

/// Label-stratified split: row indices of the held-out validation set and
/// the remaining training set, both ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};
Split stratified_split(const corpus::Corpus& corpus, double validation_fraction, std::uint64_t seed);

/// Everything needed to continue training: both models with their optimizer
/// state, the number of completed epochs and the telemetry so far.
struct TrainState {
  TrainState(Generator g, Discriminator d, const nn::AdamConfig& g_config, const nn::AdamConfig& d_config);
  // Optimizers alias the models' parameters, so copies would tangle them.
  TrainState(const TrainState&) = delete;
  TrainState& operator=(const TrainState&) = delete;
  TrainState(TrainState&&) noexcept = default;
  TrainState& operator=(TrainState&&) noexcept = default;

  Generator generator;
  Discriminator discriminator;
  nn::Adam generator_optimizer;
  nn::Adam discriminator_optimizer;
  std::size_t completed_epochs = 0;
  std::vector<EpochTelemetry> telemetry;
};

TrainState initial_state(const TrainConfig& config);
nn::Checkpoint to_checkpoint(const TrainState& state, const TrainConfig& config);
TrainState from_checkpoint(const nn::Checkpoint& checkpoint);

struct TrainHooks {
  /// Where periodic checkpoints go ("epoch_<n>.ckpt" plus "last.ckpt"); unset disables them.
  std::optional<std::filesystem::path> checkpoint_dir;
  /// Extra metadata stored in every checkpoint written.
  std::map<std::string, std::string> checkpoint_meta;
  /// Called after each epoch's telemetry is recorded.
  std::function<void(const EpochTelemetry&)> on_epoch;
  /// Stop after this many completed epochs (for interrupted runs).
  std::optional<std::size_t> stop_after;
};

/// Adversarial training from `state` until `config.epochs` epochs are done.
/// Each iteration runs `d_steps_per_iter` discriminator updates on independent
/// real mini-batches, then one non-saturating generator update.
TrainState train_cgan(const corpus::Corpus& corpus, const TrainConfig& config, TrainState state,
                      const TrainHooks& hooks = {});
TrainState train_cgan(const corpus::Corpus& corpus, const TrainConfig& config, const TrainHooks& hooks = {});

/// One training iteration on explicit batches; exposed for tests.
/// `real_batches` holds d_steps row-index lists, `generator_labels` the label
/// rows used for the generator update.
struct IterationInputs {
  std::vector<std::vector<std::size_t>> real_batches;
  std::vector<std::size_t> generator_label_rows;
};
void train_iteration(const corpus::Corpus& corpus, const IterationInputs& inputs, TrainState& state, Rng& rng);

/// n profiles of one label, row-major n x 168 in [0, 1] scaled units.
std::vector<double> generate(const Generator& generator, corpus::ConditionLabel label, std::size_t n,
                             std::uint64_t seed);
/// One profile per entry of `labels`.
std::vector<double> generate(const Generator& generator, std::span<const corpus::ConditionLabel> labels,
                             std::uint64_t seed);

/// Smallest Euclidean distance from each generated row to any reference row.
std::vector<double> nearest_distances(std::span<const double> generated, std::span<const double> reference);

}  // namespace loadgan::cgan
