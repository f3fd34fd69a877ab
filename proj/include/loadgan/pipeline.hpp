#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "loadgan/cgan.hpp"
#include "loadgan/corpus.hpp"
#include "loadgan/eval/forecast.hpp"
#include "loadgan/grid/gridmap.hpp"
#include "loadgan/kv_config.hpp"
#include "loadgan/surrogate.hpp"

namespace loadgan::pipeline {

/// Everything a subcommand needs, read from one key-value file. `seed`
/// drives the surrogate, the training run, generation and the forecaster.
struct RunConfig {
  std::filesystem::path out_dir = "out";
  /// Measured series (`timestamp,load_id,mw`); empty selects the surrogate.
  std::filesystem::path raw_series;
  std::filesystem::path grid_case = "data/case14.m";
  /// Trained checkpoint; empty means `checkpoints/last.ckpt` under out_dir.
  std::filesystem::path model;
  std::uint64_t seed = 2017;

  corpus::SurrogateConfig surrogate;
  cgan::TrainConfig train;
  eval::ForecastConfig forecast;

  /// Generated profiles per label for `eval wd` and `eval psd`.
  std::size_t eval_samples = 500;
  /// Synthetic training profiles per forecast label.
  std::size_t forecast_profiles = 1200;
  /// Labels of the forecast transfer test, `;`-separated.
  std::vector<corpus::ConditionLabel> forecast_labels;
  /// Corpus week (0-based, per load) mapped by `gridmap --source corpus`.
  std::size_t grid_week = 0;

  std::filesystem::path corpus_path() const { return out_dir / "corpus.csv"; }
  std::filesystem::path checkpoint_dir() const { return out_dir / "checkpoints"; }
  std::filesystem::path report_dir() const { return out_dir / "reports"; }
  std::filesystem::path model_path() const { return model.empty() ? checkpoint_dir() / "last.ckpt" : model; }

  static RunConfig from_key_values(const config::KeyValues& values);
};

/// Applies flag overrides on top of a config file (either may be absent).
RunConfig load_run_config(const std::optional<std::filesystem::path>& file, const std::optional<std::uint64_t>& seed,
                          const std::optional<std::filesystem::path>& out_dir);

using Log = std::function<void(const std::string&)>;

/// Surrogate or ingested corpus, written as `corpus.csv` plus manifest.
corpus::Corpus make_corpus(const RunConfig& config, const Log& log = {});

/// Trains on the corpus at `corpus_path()`, resuming from `resume` when set.
/// Writes checkpoints and `reports/telemetry.csv`.
cgan::TrainState train(const RunConfig& config, const std::optional<std::filesystem::path>& resume = {},
                       const Log& log = {});

/// The trained generator with the scale record of its training corpus.
struct Model {
  cgan::Generator generator;
  corpus::ScaleRecord scale;
};
Model load_model(const std::filesystem::path& checkpoint);

/// n profiles as a corpus in the profile CSV schema: scaled values, load id
/// `synthetic`, weekly mean 1.
corpus::Corpus generate_corpus(const Model& model, corpus::ConditionLabel label, std::size_t n, std::uint64_t seed);
std::string generate_csv(const Model& model, const std::string& label, std::size_t n, std::uint64_t seed);

/// W1 between pooled generated values of each label (rows) and pooled real
/// values of each label (columns); NaN where a real label has no rows.
struct WassersteinMatrix {
  std::vector<double> values;  // 8 x 8
  std::vector<std::size_t> real_counts;

  double at(std::size_t generated, std::size_t real) const { return values[generated * corpus::kLabelCount + real]; }
  /// The diagonal entry is strictly smallest in its row.
  bool row_separates(std::size_t label) const;
};
WassersteinMatrix wasserstein_matrix(const corpus::Corpus& real, const corpus::Corpus& synthetic);

struct ForecastTransfer {
  corpus::ConditionLabel label;
  eval::ForecastReport real;
  eval::ForecastReport synthetic;
};
/// Trains one forecaster per label on generated profiles, then scores it on
/// the real rows of that label and on as many fresh generated profiles.
std::vector<ForecastTransfer> forecast_transfer(const Model& model, const corpus::Corpus& real,
                                                const RunConfig& config, const Log& log = {});

/// Report files written by an eval run, plus its one-paragraph summary.
struct Report {
  std::vector<std::filesystem::path> files;
  std::string summary;
};

Report eval_wd(const RunConfig& config, const std::optional<std::filesystem::path>& synthetic_csv,
               const Log& log = {});
Report eval_psd(const RunConfig& config, const std::optional<std::filesystem::path>& synthetic_csv,
                const Log& log = {});
Report eval_forecast(const RunConfig& config, const Log& log = {});

/// One week per loaded bus, labels assigned round-robin in weekly-normalized
/// units: from the generator (`source = generated`) or the corpus.
grid::LoadAssignment assign_profiles(const grid::GridCase& grid, const RunConfig& config, const std::string& source);
Report gridmap(const RunConfig& config, const std::string& source, const Log& log = {});

}  // namespace loadgan::pipeline
