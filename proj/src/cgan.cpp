#include "loadgan/cgan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "loadgan/corpus_io.hpp"
#include "loadgan/error.hpp"
#include "loadgan/eval/wasserstein.hpp"
#include "loadgan/kv_config.hpp"
#include "loadgan/nn/ops.hpp"
#include "loadgan/random.hpp"

namespace loadgan::cgan {

using corpus::kHoursPerWeek;
using corpus::kLabelWidth;
using nn::Activation;
using nn::LayerSpec;
using nn::Tensor;

namespace {

// RNG streams derived from the training seed.
constexpr std::uint64_t kGeneratorInitStream = 1;
constexpr std::uint64_t kDiscriminatorInitStream = 2;
constexpr std::uint64_t kSplitStream = 3;
constexpr std::uint64_t kEpochStreamBase = 1ull << 20;
constexpr std::uint64_t kTelemetryStreamBase = 1ull << 40;

constexpr std::size_t kTelemetryFakeRepeats = 4;
constexpr std::size_t kGenerateChunk = 4096;

std::vector<nn::Layer> build(const std::vector<LayerSpec>& specs, Rng& rng) {
  std::vector<nn::Layer> layers;
  for (const auto& s : specs) layers.emplace_back(s, rng);
  return layers;
}

void check_specs(const std::vector<nn::Layer>& layers, const std::vector<LayerSpec>& expected, const char* what) {
  bool ok = layers.size() == expected.size();
  for (std::size_t i = 0; ok && i < layers.size(); ++i) ok = layers[i].spec() == expected[i];
  if (!ok) fail(ErrorCode::ShapeMismatch, std::string(what) + " layers do not match the architecture");
}

Tensor rows_tensor(const corpus::Corpus& corpus, std::span<const std::size_t> rows) {
  std::vector<double> v;
  v.reserve(rows.size() * kHoursPerWeek);
  for (std::size_t r : rows) {
    const auto p = corpus.profile(r);
    v.insert(v.end(), p.begin(), p.end());
  }
  return Tensor::from({rows.size(), kHoursPerWeek}, std::move(v));
}

Tensor labels_tensor(std::span<const corpus::ConditionLabel> labels) {
  std::vector<double> v;
  v.reserve(labels.size() * kLabelWidth);
  for (const auto& l : labels) {
    const auto h = l.one_hot();
    v.insert(v.end(), h.begin(), h.end());
  }
  return Tensor::from({labels.size(), kLabelWidth}, std::move(v));
}

Tensor labels_tensor(const corpus::Corpus& corpus, std::span<const std::size_t> rows) {
  std::vector<corpus::ConditionLabel> labels;
  labels.reserve(rows.size());
  for (std::size_t r : rows) labels.push_back(corpus.labels[r]);
  return labels_tensor(labels);
}

Tensor noise(std::size_t batch, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(batch * kNoiseDim);
  for (double& x : v) x = g(rng);
  return Tensor::from({batch, kNoiseDim}, std::move(v));
}

double mean_of(const Tensor& t) {
  const auto v = t.values();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Excludes a model's parameters from graph recording while alive.
class FrozenParameters {
 public:
  explicit FrozenParameters(std::vector<Tensor> params) : params_(std::move(params)) {
    for (auto& p : params_) p.node()->requires_grad = false;
  }
  ~FrozenParameters() {
    for (auto& p : params_) p.node()->requires_grad = true;
  }
  FrozenParameters(const FrozenParameters&) = delete;
  FrozenParameters& operator=(const FrozenParameters&) = delete;

 private:
  std::vector<Tensor> params_;
};

Tensor discriminator_batch_mean(const Discriminator& d, const corpus::Corpus& corpus, std::span<const std::size_t> rows) {
  return d.forward(rows_tensor(corpus, rows), labels_tensor(corpus, rows));
}

EpochTelemetry measure(const corpus::Corpus& corpus, const Split& split, const TrainState& state,
                       const TrainConfig& config, std::size_t epoch) {
  nn::NoGradGuard guard;
  EpochTelemetry t;
  t.epoch = epoch;
  t.d_train = mean_of(discriminator_batch_mean(state.discriminator, corpus, split.train));
  t.d_val = mean_of(discriminator_batch_mean(state.discriminator, corpus, split.validation));

  std::vector<corpus::ConditionLabel> labels;
  for (std::size_t k = 0; k < kTelemetryFakeRepeats; ++k) {
    for (std::size_t r : split.validation) labels.push_back(corpus.labels[r]);
  }
  Rng rng = make_rng(config.seed, kTelemetryStreamBase + epoch);
  const Tensor y = labels_tensor(labels);
  const Tensor fake = state.generator.forward(noise(labels.size(), rng), y);
  t.d_fake = mean_of(state.discriminator.forward(fake, y));

  const Tensor real_val = rows_tensor(corpus, split.validation);
  t.w1 = eval::wasserstein1(fake.values(), real_val.values());
  return t;
}

std::string checkpoint_name(std::size_t epoch) { return "epoch_" + std::to_string(epoch) + ".ckpt"; }

}  // namespace

// ---------------------------------------------------------------- models

std::vector<LayerSpec> Generator::specs() {
  return {
      LayerSpec::dense(kNoiseDim + kLabelWidth, 128, Activation::Relu),
      LayerSpec::dense(128, 256, Activation::Relu),
      LayerSpec::dense(256, kSeedChannels * kSeedLength, Activation::Relu),
      LayerSpec::tconv(kSeedChannels, 16, 4, 2, 1, Activation::Relu),
      LayerSpec::tconv(16, 8, 4, 2, 1, Activation::Relu),
      LayerSpec::tconv(8, 1, 4, 2, 1, Activation::Sigmoid),
  };
}

Generator::Generator(Rng& rng) : layers_(build(specs(), rng)) {}

Generator::Generator(std::vector<nn::Layer> layers) : layers_(std::move(layers)) {
  check_specs(layers_, specs(), "generator");
}

Tensor Generator::forward(const Tensor& z, const Tensor& y) const {
  if (z.rank() != 2 || z.dim(1) != kNoiseDim || y.rank() != 2 || y.dim(1) != kLabelWidth || z.dim(0) != y.dim(0)) {
    fail(ErrorCode::ShapeMismatch, "generator expects z [B, 25] and y [B, 6], got " + nn::shape_string(z.shape()) +
                                       " and " + nn::shape_string(y.shape()));
  }
  const std::size_t batch = z.dim(0);
  Tensor h = nn::concat_columns(z, y);
  for (std::size_t i = 0; i < 3; ++i) h = layers_[i].forward(h);
  h = nn::reshape(h, {batch, kSeedChannels, kSeedLength});
  for (std::size_t i = 3; i < 6; ++i) h = layers_[i].forward(h);
  return nn::reshape(h, {batch, kHoursPerWeek});
}

std::vector<nn::Shape> Generator::shape_trace(std::size_t batch) {
  std::vector<nn::Shape> trace = {{batch, kNoiseDim + kLabelWidth}};
  const auto s = specs();
  for (std::size_t i = 0; i < 3; ++i) trace.push_back({batch, s[i].out});
  std::size_t length = kSeedLength;
  trace.push_back({batch, kSeedChannels, length});
  for (std::size_t i = 3; i < 6; ++i) {
    length = s[i].output_length(length);
    trace.push_back({batch, s[i].out, length});
  }
  return trace;
}

std::vector<LayerSpec> Discriminator::specs() {
  const std::size_t len1 = nn::conv1d_output_length(kHoursPerWeek, 8, 2, 3);
  const std::size_t len2 = nn::conv1d_output_length(len1, 8, 2, 3);
  return {
      LayerSpec::conv(1, 16, 8, 2, 3, Activation::LeakyRelu),
      LayerSpec::conv(16, 32, 8, 2, 3, Activation::LeakyRelu),
      LayerSpec::dense(32 * len2 + kLabelWidth, 512, Activation::LeakyRelu),
      LayerSpec::dense(512, 256, Activation::LeakyRelu),
      LayerSpec::dense(256, 1, Activation::Sigmoid),
  };
}

Discriminator::Discriminator(Rng& rng) : layers_(build(specs(), rng)) {}

Discriminator::Discriminator(std::vector<nn::Layer> layers) : layers_(std::move(layers)) {
  check_specs(layers_, specs(), "discriminator");
}

Tensor Discriminator::forward(const Tensor& x, const Tensor& y) const {
  if (x.rank() != 2 || x.dim(1) != kHoursPerWeek || y.rank() != 2 || y.dim(1) != kLabelWidth || x.dim(0) != y.dim(0)) {
    fail(ErrorCode::ShapeMismatch, "discriminator expects x [B, 168] and y [B, 6], got " +
                                       nn::shape_string(x.shape()) + " and " + nn::shape_string(y.shape()));
  }
  const std::size_t batch = x.dim(0);
  Tensor h = nn::reshape(x, {batch, 1, kHoursPerWeek});
  h = layers_[0].forward(h);
  h = layers_[1].forward(h);
  h = nn::reshape(h, {batch, h.dim(1) * h.dim(2)});
  h = nn::concat_columns(h, y);
  for (std::size_t i = 2; i < 5; ++i) h = layers_[i].forward(h);
  return h;
}

// ---------------------------------------------------------------- config

double TrainConfig::lr_scale(std::size_t epoch) const {
  const double start = lr_decay_start * static_cast<double>(epochs);
  const double last = static_cast<double>(epochs - 1);
  const double e = static_cast<double>(epoch);
  if (e <= start || last <= start) return 1.0;
  return 1.0 - (1.0 - lr_final_scale) * std::min(1.0, (e - start) / (last - start));
}

void TrainConfig::validate() const {
  if (epochs == 0) fail(ErrorCode::BadConfig, "epochs must be >= 1");
  if (batch_size == 0) fail(ErrorCode::BadConfig, "batch_size must be >= 1");
  if (d_steps_per_iter == 0) fail(ErrorCode::BadConfig, "d_steps_per_iter must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    fail(ErrorCode::BadConfig, "validation_fraction must lie in (0, 1)");
  }
  for (const auto* o : {&generator_optimizer, &discriminator_optimizer}) {
    if (!(o->learning_rate > 0.0) || !(o->beta1 >= 0.0 && o->beta1 < 1.0) || !(o->beta2 >= 0.0 && o->beta2 < 1.0) ||
        !(o->epsilon > 0.0)) {
      fail(ErrorCode::BadConfig, "invalid optimizer settings");
    }
  }
  if (!(lr_decay_start >= 0.0 && lr_decay_start <= 1.0)) fail(ErrorCode::BadConfig, "lr_decay_start must lie in [0, 1]");
  if (!(lr_final_scale > 0.0 && lr_final_scale <= 1.0)) fail(ErrorCode::BadConfig, "lr_final_scale must lie in (0, 1]");
}

TrainConfig TrainConfig::from_key_values(const std::map<std::string, std::string>& values) {
  TrainConfig c;
  c.epochs = config::get_size(values, "epochs", c.epochs);
  c.batch_size = config::get_size(values, "batch_size", c.batch_size);
  c.d_steps_per_iter = config::get_size(values, "d_steps_per_iter", c.d_steps_per_iter);
  c.validation_fraction = config::get_double(values, "validation_fraction", c.validation_fraction);
  c.seed = config::get_u64(values, "seed", c.seed);
  c.checkpoint_every = config::get_size(values, "checkpoint_every", c.checkpoint_every);
  c.lr_decay_start = config::get_double(values, "lr_decay_start", c.lr_decay_start);
  c.lr_final_scale = config::get_double(values, "lr_final_scale", c.lr_final_scale);
  const double beta1 = config::get_double(values, "beta1", c.generator_optimizer.beta1);
  const double beta2 = config::get_double(values, "beta2", c.generator_optimizer.beta2);
  c.generator_optimizer.learning_rate = config::get_double(values, "lr_generator", c.generator_optimizer.learning_rate);
  c.discriminator_optimizer.learning_rate =
      config::get_double(values, "lr_discriminator", c.discriminator_optimizer.learning_rate);
  for (auto* o : {&c.generator_optimizer, &c.discriminator_optimizer}) {
    o->beta1 = beta1;
    o->beta2 = beta2;
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------- telemetry

std::string telemetry_csv(const std::vector<EpochTelemetry>& telemetry) {
  std::string out = "epoch,d_train,d_val,d_fake,w1\n";
  for (const auto& t : telemetry) {
    out += std::to_string(t.epoch) + ',' + corpus::format_double(t.d_train) + ',' + corpus::format_double(t.d_val) +
           ',' + corpus::format_double(t.d_fake) + ',' + corpus::format_double(t.w1) + '\n';
  }
  return out;
}

std::vector<EpochTelemetry> parse_telemetry_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "epoch,d_train,d_val,d_fake,w1") {
    fail(ErrorCode::ParseError, "telemetry: unexpected header");
  }
  std::vector<EpochTelemetry> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5) fail(ErrorCode::ParseError, "telemetry line " + std::to_string(line_no) + ": expected 5 fields");
    EpochTelemetry t;
    t.epoch = static_cast<std::size_t>(corpus::parse_double(f[0]));
    t.d_train = corpus::parse_double(f[1]);
    t.d_val = corpus::parse_double(f[2]);
    t.d_fake = corpus::parse_double(f[3]);
    t.w1 = corpus::parse_double(f[4]);
    out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------- training

Split stratified_split(const corpus::Corpus& corpus, double validation_fraction, std::uint64_t seed) {
  if (corpus.rows() == 0) fail(ErrorCode::EmptyInput, "cannot split an empty corpus");
  Rng rng = make_rng(seed, kSplitStream);
  Split split;
  for (std::size_t c = 0; c < corpus::kLabelCount; ++c) {
    auto rows = corpus.rows_with(corpus::ConditionLabel::from_index(c));
    if (rows.empty()) continue;
    std::shuffle(rows.begin(), rows.end(), rng);
    auto held = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(rows.size())));
    held = std::min(held, rows.size() - 1);
    split.validation.insert(split.validation.end(), rows.begin(), rows.begin() + static_cast<long>(held));
    split.train.insert(split.train.end(), rows.begin() + static_cast<long>(held), rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  if (split.validation.empty()) fail(ErrorCode::EmptyInput, "validation split is empty");
  return split;
}

TrainState::TrainState(Generator g, Discriminator d, const nn::AdamConfig& g_config, const nn::AdamConfig& d_config)
    : generator(std::move(g)),
      discriminator(std::move(d)),
      generator_optimizer(generator.parameters(), g_config),
      discriminator_optimizer(discriminator.parameters(), d_config) {}

TrainState initial_state(const TrainConfig& config) {
  config.validate();
  Rng g_rng = make_rng(config.seed, kGeneratorInitStream);
  Rng d_rng = make_rng(config.seed, kDiscriminatorInitStream);
  return TrainState(Generator(g_rng), Discriminator(d_rng), config.generator_optimizer,
                    config.discriminator_optimizer);
}

nn::Checkpoint to_checkpoint(const TrainState& state, const TrainConfig& config) {
  nn::Checkpoint ck;
  ck.meta["completed_epochs"] = std::to_string(state.completed_epochs);
  ck.meta["seed"] = std::to_string(config.seed);
  ck.meta["epochs"] = std::to_string(config.epochs);
  ck.meta["batch_size"] = std::to_string(config.batch_size);
  ck.meta["d_steps_per_iter"] = std::to_string(config.d_steps_per_iter);
  ck.meta["validation_fraction"] = corpus::format_double(config.validation_fraction);
  ck.meta["telemetry"] = telemetry_csv(state.telemetry);
  ck.models.push_back(nn::make_block("generator", state.generator.layers(), &state.generator_optimizer));
  ck.models.push_back(nn::make_block("discriminator", state.discriminator.layers(), &state.discriminator_optimizer));
  return ck;
}

TrainState from_checkpoint(const nn::Checkpoint& checkpoint) {
  const auto& g = checkpoint.model("generator");
  const auto& d = checkpoint.model("discriminator");
  if (!g.optimizer || !d.optimizer) fail(ErrorCode::MissingSection, "checkpoint lacks optimizer state");
  TrainState state(Generator(nn::layers_from_block(g)), Discriminator(nn::layers_from_block(d)), g.optimizer->config,
                   d.optimizer->config);
  state.generator_optimizer.restore(*g.optimizer);
  state.discriminator_optimizer.restore(*d.optimizer);
  const auto it = checkpoint.meta.find("completed_epochs");
  if (it == checkpoint.meta.end()) fail(ErrorCode::MissingSection, "checkpoint lacks completed_epochs");
  state.completed_epochs = static_cast<std::size_t>(std::stoull(it->second));
  const auto tel = checkpoint.meta.find("telemetry");
  if (tel != checkpoint.meta.end()) state.telemetry = parse_telemetry_csv(tel->second);
  return state;
}

void train_iteration(const corpus::Corpus& corpus, const IterationInputs& inputs, TrainState& state, Rng& rng) {
  for (const auto& rows : inputs.real_batches) {
    const std::size_t b = rows.size();
    const Tensor x = rows_tensor(corpus, rows);
    const Tensor y = labels_tensor(corpus, rows);
    Tensor fake;
    {
      nn::NoGradGuard guard;
      fake = state.generator.forward(noise(b, rng), y);
    }
    state.discriminator_optimizer.zero_grad();
    const std::vector<double> ones(b, 1.0), zeros(b, 0.0);
    const Tensor loss = nn::add(nn::bce_loss(state.discriminator.forward(x, y), ones),
                                nn::bce_loss(state.discriminator.forward(fake, y), zeros));
    loss.backward();
    state.discriminator_optimizer.step();
  }

  const std::size_t b = inputs.generator_label_rows.size();
  if (b == 0) return;
  const Tensor y = labels_tensor(corpus, inputs.generator_label_rows);
  const Tensor z = noise(b, rng);
  state.generator_optimizer.zero_grad();
  FrozenParameters frozen(state.discriminator.parameters());
  const Tensor loss = nn::bce_loss(state.discriminator.forward(state.generator.forward(z, y), y),
                                   std::vector<double>(b, 1.0));
  loss.backward();
  state.generator_optimizer.step();
}

TrainState train_cgan(const corpus::Corpus& corpus, const TrainConfig& config, TrainState state,
                      const TrainHooks& hooks) {
  config.validate();
  const Split split = stratified_split(corpus, config.validation_fraction, config.seed);
  const std::size_t b = config.batch_size;
  const std::size_t chunk = b * config.d_steps_per_iter;
  if (split.train.size() < chunk) {
    fail(ErrorCode::BadConfig, "training split (" + std::to_string(split.train.size()) +
                                   " rows) is smaller than batch_size * d_steps_per_iter");
  }

  auto save = [&](const std::string& name) {
    if (!hooks.checkpoint_dir) return;
    std::filesystem::create_directories(*hooks.checkpoint_dir);
    auto ck = to_checkpoint(state, config);
    for (const auto& [key, value] : hooks.checkpoint_meta) ck.meta.emplace(key, value);
    nn::save_checkpoint(*hooks.checkpoint_dir / name, ck);
  };

  std::vector<std::size_t> order;
  while (state.completed_epochs < config.epochs) {
    if (hooks.stop_after && state.completed_epochs >= *hooks.stop_after) break;
    const std::size_t epoch = state.completed_epochs;
    Rng rng = make_rng(config.seed, kEpochStreamBase + epoch);
    order = split.train;
    std::shuffle(order.begin(), order.end(), rng);
    const double scale = config.lr_scale(epoch);
    state.generator_optimizer.set_learning_rate(scale * config.generator_optimizer.learning_rate);
    state.discriminator_optimizer.set_learning_rate(scale * config.discriminator_optimizer.learning_rate);

    for (std::size_t start = 0; start + chunk <= order.size(); start += chunk) {
      IterationInputs inputs;
      for (std::size_t s = 0; s < config.d_steps_per_iter; ++s) {
        const auto first = order.begin() + static_cast<long>(start + s * b);
        inputs.real_batches.emplace_back(first, first + static_cast<long>(b));
      }
      inputs.generator_label_rows = inputs.real_batches.front();
      train_iteration(corpus, inputs, state, rng);
    }

    state.telemetry.push_back(measure(corpus, split, state, config, epoch));
    state.completed_epochs = epoch + 1;
    if (hooks.on_epoch) hooks.on_epoch(state.telemetry.back());
    if (config.checkpoint_every > 0 && state.completed_epochs % config.checkpoint_every == 0) {
      save(checkpoint_name(state.completed_epochs));
      save("last.ckpt");
    }
  }
  save("last.ckpt");
  return state;
}

TrainState train_cgan(const corpus::Corpus& corpus, const TrainConfig& config, const TrainHooks& hooks) {
  return train_cgan(corpus, config, initial_state(config), hooks);
}

// ---------------------------------------------------------------- sampling

std::vector<double> generate(const Generator& generator, std::span<const corpus::ConditionLabel> labels,
                             std::uint64_t seed) {
  nn::NoGradGuard guard;
  Rng rng = make_rng(seed);
  std::vector<double> out;
  out.reserve(labels.size() * kHoursPerWeek);
  for (std::size_t start = 0; start < labels.size(); start += kGenerateChunk) {
    const std::size_t n = std::min(kGenerateChunk, labels.size() - start);
    const Tensor z = noise(n, rng);
    const Tensor y = labels_tensor(labels.subspan(start, n));
    const Tensor x = generator.forward(z, y);
    out.insert(out.end(), x.values().begin(), x.values().end());
  }
  return out;
}

std::vector<double> generate(const Generator& generator, corpus::ConditionLabel label, std::size_t n,
                             std::uint64_t seed) {
  const std::vector<corpus::ConditionLabel> labels(n, label);
  return generate(generator, labels, seed);
}

std::vector<double> nearest_distances(std::span<const double> generated, std::span<const double> reference) {
  if (generated.size() % kHoursPerWeek != 0 || reference.size() % kHoursPerWeek != 0) {
    fail(ErrorCode::ShapeMismatch, "nearest_distances expects rows of 168 values");
  }
  if (reference.empty()) fail(ErrorCode::EmptyInput, "nearest_distances needs a nonempty reference set");
  const std::size_t n = generated.size() / kHoursPerWeek;
  const std::size_t m = reference.size() / kHoursPerWeek;
  std::vector<double> out(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const double* g = generated.data() + i * kHoursPerWeek;
    for (std::size_t j = 0; j < m; ++j) {
      const double* r = reference.data() + j * kHoursPerWeek;
      double d = 0.0;
      for (std::size_t h = 0; h < kHoursPerWeek; ++h) d += (g[h] - r[h]) * (g[h] - r[h]);
      out[i] = std::min(out[i], d);
    }
    out[i] = std::sqrt(out[i]);
  }
  return out;
}

}  // namespace loadgan::cgan
