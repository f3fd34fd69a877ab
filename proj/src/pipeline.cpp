#include "loadgan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "loadgan/corpus_io.hpp"
#include "loadgan/error.hpp"
#include "loadgan/eval/psd.hpp"
#include "loadgan/eval/wasserstein.hpp"
#include "loadgan/kmeans.hpp"
#include "loadgan/random.hpp"

namespace loadgan::pipeline {

namespace fs = std::filesystem;
using corpus::ConditionLabel;
using corpus::kHoursPerWeek;
using corpus::kLabelCount;

namespace {

constexpr std::uint64_t kForecastSeedStream = 1ull << 32;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "out_dir", "raw_series", "grid_case", "model", "seed", "eval_samples", "forecast_profiles", "forecast_labels",
      "grid_week", "loads", "weeks", "noise_sigma", "step_rate", "epochs", "batch_size", "d_steps_per_iter",
      "validation_fraction", "checkpoint_every", "beta1", "beta2", "lr_generator", "lr_discriminator", "lr_decay_start", "lr_final_scale",
      "forecast_hidden", "forecast_layers", "forecast_window", "forecast_window_stride", "forecast_epochs",
      "forecast_batch_size", "forecast_learning_rate", "forecast_seed"};
  return keys;
}

void say(const Log& log, const std::string& line) {
  if (log) log(line);
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string label_slug(ConditionLabel label) {
  return std::string(corpus::season_name(label.season)) + "_" + std::string(corpus::type_name(label.type));
}

std::vector<ConditionLabel> parse_label_list(const std::string& text) {
  std::vector<ConditionLabel> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(';', start), text.size());
    std::string item = text.substr(start, end - start);
    const auto first = item.find_first_not_of(" \t");
    if (first != std::string::npos) {
      item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
      out.push_back(ConditionLabel::parse(item));
    }
    start = end + 1;
  }
  if (out.empty()) fail(ErrorCode::BadConfig, "forecast_labels names no label");
  return out;
}

// Monday of the first full week of the label's season in 2017.
corpus::Date season_start(corpus::Season season) {
  switch (season) {
    case corpus::Season::Winter: return corpus::make_date(2017, 1, 2);
    case corpus::Season::Spring: return corpus::make_date(2017, 3, 6);
    case corpus::Season::Summer: return corpus::make_date(2017, 6, 5);
    case corpus::Season::Fall: return corpus::make_date(2017, 9, 4);
  }
  return corpus::make_date(2017, 1, 2);
}

std::vector<double> pooled_values(const corpus::Corpus& c, std::size_t label) {
  std::vector<double> out;
  for (std::size_t row : c.rows_with(ConditionLabel::from_index(label))) {
    const auto p = c.profile(row);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<double> rows_of(const corpus::Corpus& c, const std::vector<std::size_t>& rows) {
  std::vector<double> out;
  out.reserve(rows.size() * kHoursPerWeek);
  for (std::size_t r : rows) {
    const auto p = c.profile(r);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) { return make_rng(seed, stream)(); }

corpus::Corpus generate_all_labels(const Model& model, std::size_t per_label, std::uint64_t seed) {
  std::vector<ConditionLabel> labels;
  for (std::size_t l = 0; l < kLabelCount; ++l) labels.insert(labels.end(), per_label, ConditionLabel::from_index(l));
  corpus::Corpus c;
  c.profiles = cgan::generate(model.generator, labels, seed);
  c.labels = labels;
  c.scale = model.scale;
  for (const auto& label : labels) c.meta.push_back({"synthetic", season_start(label.season), 1.0});
  return c;
}

corpus::Corpus synthetic_or_generated(const RunConfig& config, const std::optional<fs::path>& synthetic_csv,
                                      const Log& log) {
  if (synthetic_csv) {
    say(log, "reading synthetic profiles from " + synthetic_csv->string());
    return corpus::load_corpus(*synthetic_csv);
  }
  const Model model = load_model(config.model_path());
  say(log, "generating " + std::to_string(config.eval_samples) + " profiles per label");
  return generate_all_labels(model, config.eval_samples, config.seed);
}

void write_report(Report& report, const fs::path& path, const std::string& contents) {
  corpus::write_text_file(path, contents);
  report.files.push_back(path);
}

void finish(Report& report, const fs::path& path, const Log& log) {
  corpus::write_text_file(path, report.summary);
  report.files.push_back(path);
  std::istringstream lines(report.summary);
  for (std::string line; std::getline(lines, line);) say(log, line);
}

}  // namespace

RunConfig RunConfig::from_key_values(const config::KeyValues& values) {
  for (const auto& [key, value] : values) {
    if (!known_keys().count(key)) fail(ErrorCode::BadConfig, "unknown config key '" + key + "'");
  }
  RunConfig c;
  c.out_dir = config::get_string(values, "out_dir", c.out_dir.string());
  c.raw_series = config::get_string(values, "raw_series", c.raw_series.string());
  c.grid_case = config::get_string(values, "grid_case", c.grid_case.string());
  c.model = config::get_string(values, "model", "");
  c.seed = config::get_u64(values, "seed", c.seed);
  c.surrogate = corpus::SurrogateConfig::from_key_values(values);
  c.train = cgan::TrainConfig::from_key_values(values);
  c.forecast = eval::ForecastConfig::from_key_values(values);
  c.surrogate.seed = c.seed;
  c.train.seed = c.seed;
  c.forecast.seed = config::get_u64(values, "forecast_seed", c.seed);
  c.eval_samples = config::get_size(values, "eval_samples", c.eval_samples);
  c.forecast_profiles = config::get_size(values, "forecast_profiles", c.forecast_profiles);
  c.forecast_labels = parse_label_list(config::get_string(values, "forecast_labels", "summer residential; fall residential"));
  c.grid_week = config::get_size(values, "grid_week", c.grid_week);
  if (c.eval_samples == 0) fail(ErrorCode::BadConfig, "eval_samples must be >= 1");
  if (c.forecast_profiles == 0) fail(ErrorCode::BadConfig, "forecast_profiles must be >= 1");
  if (c.out_dir.empty()) fail(ErrorCode::BadConfig, "out_dir must not be empty");
  return c;
}

RunConfig load_run_config(const std::optional<fs::path>& file, const std::optional<std::uint64_t>& seed,
                          const std::optional<fs::path>& out_dir) {
  config::KeyValues values;
  if (file) values = config::load_key_values(*file);
  if (seed) values["seed"] = std::to_string(*seed);
  if (out_dir) values["out_dir"] = out_dir->string();
  return RunConfig::from_key_values(values);
}

// ---------------------------------------------------------------- corpus

corpus::Corpus make_corpus(const RunConfig& config, const Log& log) {
  corpus::Corpus c;
  config::KeyValues extra;
  if (config.raw_series.empty()) {
    say(log, "building surrogate corpus: " + std::to_string(config.surrogate.loads) + " loads x " +
                 std::to_string(config.surrogate.weeks) + " weeks");
    c = corpus::make_surrogate_corpus(config.surrogate).corpus;
    extra["source"] = "surrogate";
  } else {
    say(log, "ingesting " + config.raw_series.string());
    std::ifstream in(config.raw_series);
    if (!in) fail(ErrorCode::IoError, "cannot open " + config.raw_series.string());
    const auto series = corpus::read_raw_series_csv(in);
    const auto profiles = corpus::profiles_from_series(series);
    const auto labeling = corpus::label_load_types(profiles, config.seed);
    c = corpus::assemble_corpus(profiles, labeling.types);
    extra["source"] = config.raw_series.string();
  }
  extra["seed"] = std::to_string(config.seed);
  fs::create_directories(config.out_dir);
  corpus::save_corpus(config.corpus_path(), c, extra);
  say(log, "wrote " + std::to_string(c.rows()) + " profiles to " + config.corpus_path().string());
  return c;
}

// ---------------------------------------------------------------- training

cgan::TrainState train(const RunConfig& config, const std::optional<fs::path>& resume, const Log& log) {
  const corpus::Corpus c = corpus::load_corpus(config.corpus_path());
  say(log, "training on " + std::to_string(c.rows()) + " profiles for " + std::to_string(config.train.epochs) +
               " epochs");
  cgan::TrainState state = cgan::initial_state(config.train);
  if (resume) {
    const auto ck = nn::load_checkpoint(*resume);
    for (const char* key : {"seed", "batch_size", "d_steps_per_iter"}) {
      const auto expected = key == std::string("seed")         ? std::to_string(config.train.seed)
                            : key == std::string("batch_size") ? std::to_string(config.train.batch_size)
                                                               : std::to_string(config.train.d_steps_per_iter);
      const auto it = ck.meta.find(key);
      if (it == ck.meta.end() || it->second != expected) {
        fail(ErrorCode::BadConfig, std::string("checkpoint ") + key + " does not match the config");
      }
    }
    state = cgan::from_checkpoint(ck);
    say(log, "resuming after epoch " + std::to_string(state.completed_epochs));
  }

  cgan::TrainHooks hooks;
  hooks.checkpoint_dir = config.checkpoint_dir();
  hooks.checkpoint_meta = {{"scale_min", corpus::format_double(c.scale.min)},
                           {"scale_max", corpus::format_double(c.scale.max)}};
  hooks.on_epoch = [&](const cgan::EpochTelemetry& t) {
    if (t.epoch % 10 == 0 || t.epoch + 1 == config.train.epochs) {
      say(log, "epoch " + std::to_string(t.epoch) + " d_train " + fixed(t.d_train, 3) + " d_val " + fixed(t.d_val, 3) +
                   " d_fake " + fixed(t.d_fake, 3) + " w1 " + fixed(t.w1, 5));
    }
  };
  state = cgan::train_cgan(c, config.train, std::move(state), hooks);
  fs::create_directories(config.report_dir());
  corpus::write_text_file(config.report_dir() / "telemetry.csv", cgan::telemetry_csv(state.telemetry));
  say(log, "wrote " + config.model_path().string() + " and " + (config.report_dir() / "telemetry.csv").string());
  return state;
}

// ---------------------------------------------------------------- generation

Model load_model(const fs::path& checkpoint) {
  const auto ck = nn::load_checkpoint(checkpoint);
  return {cgan::Generator(nn::layers_from_block(ck.model("generator"))), corpus::scale_from_manifest(ck.meta)};
}

corpus::Corpus generate_corpus(const Model& model, ConditionLabel label, std::size_t n, std::uint64_t seed) {
  corpus::Corpus c;
  c.profiles = cgan::generate(model.generator, label, n, seed);
  c.labels.assign(n, label);
  c.meta.assign(n, corpus::ProfileMeta{"synthetic", season_start(label.season), 1.0});
  c.scale = model.scale;
  return c;
}

std::string generate_csv(const Model& model, const std::string& label, std::size_t n, std::uint64_t seed) {
  std::ostringstream out;
  corpus::write_profile_csv(out, generate_corpus(model, ConditionLabel::parse(label), n, seed));
  return out.str();
}

// ---------------------------------------------------------------- evaluation

bool WassersteinMatrix::row_separates(std::size_t label) const {
  const double own = at(label, label);
  if (!std::isfinite(own)) return false;
  for (std::size_t other = 0; other < kLabelCount; ++other) {
    if (other == label || !std::isfinite(at(label, other))) continue;
    if (!(own < at(label, other))) return false;
  }
  return true;
}

WassersteinMatrix wasserstein_matrix(const corpus::Corpus& real, const corpus::Corpus& synthetic) {
  WassersteinMatrix m;
  m.values.assign(kLabelCount * kLabelCount, std::numeric_limits<double>::quiet_NaN());
  m.real_counts.assign(kLabelCount, 0);
  std::vector<std::vector<double>> real_pools(kLabelCount);
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    real_pools[l] = pooled_values(real, l);
    m.real_counts[l] = real_pools[l].size() / kHoursPerWeek;
  }
  for (std::size_t g = 0; g < kLabelCount; ++g) {
    const auto gen = pooled_values(synthetic, g);
    if (gen.empty()) continue;
    for (std::size_t r = 0; r < kLabelCount; ++r) {
      if (!real_pools[r].empty()) m.values[g * kLabelCount + r] = eval::wasserstein1(gen, real_pools[r]);
    }
  }
  return m;
}

std::vector<ForecastTransfer> forecast_transfer(const Model& model, const corpus::Corpus& real, const RunConfig& config,
                                                const Log& log) {
  std::vector<ForecastTransfer> out;
  for (const auto& label : config.forecast_labels) {
    const auto rows = real.rows_with(label);
    if (rows.empty()) fail(ErrorCode::EmptyInput, "corpus has no " + label.name() + " profiles");
    const std::uint64_t base = kForecastSeedStream + 2 * label.index();
    const auto train_set = cgan::generate(model.generator, label, config.forecast_profiles, derived_seed(config.seed, base));
    say(log, label.name() + ": training forecaster on " + std::to_string(config.forecast_profiles) +
                 " generated profiles");
    eval::ForecastConfig fc = config.forecast;
    fc.seed = derived_seed(config.forecast.seed, base);
    const auto forecaster = eval::train_forecaster(train_set, fc, [&](std::size_t epoch, double loss) {
      say(log, "  epoch " + std::to_string(epoch) + " loss " + fixed(loss, 6));
    });
    const auto fresh = cgan::generate(model.generator, label, rows.size(), derived_seed(config.seed, base + 1));
    out.push_back({label, eval::forecast_eval(forecaster, rows_of(real, rows), real.scale),
                   eval::forecast_eval(forecaster, fresh, model.scale)});
  }
  return out;
}

Report eval_wd(const RunConfig& config, const std::optional<fs::path>& synthetic_csv, const Log& log) {
  const corpus::Corpus real = corpus::load_corpus(config.corpus_path());
  const corpus::Corpus synthetic = synthetic_or_generated(config, synthetic_csv, log);
  const auto m = wasserstein_matrix(real, synthetic);

  Report report;
  fs::create_directories(config.report_dir());
  std::string csv = "generated,real,w1\n";
  for (std::size_t g = 0; g < kLabelCount; ++g) {
    for (std::size_t r = 0; r < kLabelCount; ++r) {
      const double v = m.at(g, r);
      if (std::isnan(v)) continue;
      csv += label_slug(ConditionLabel::from_index(g)) + ',' + label_slug(ConditionLabel::from_index(r)) + ',' +
             corpus::format_double(v) + '\n';
    }
  }
  write_report(report, config.report_dir() / "wd_matrix.csv", csv);

  std::size_t separated = 0, present = 0;
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    if (std::isnan(m.at(l, l))) continue;
    ++present;
    const bool ok = m.row_separates(l);
    separated += ok ? 1 : 0;
    report.summary += label_slug(ConditionLabel::from_index(l)) + ": w1 to own label " + fixed(m.at(l, l), 5) +
                      (ok ? ", closest" : ", not closest") + '\n';
  }
  report.summary += "labels closest to their own real class: " + std::to_string(separated) + "/" +
                    std::to_string(present) + '\n';
  finish(report, config.report_dir() / "wd_summary.txt", log);
  return report;
}

Report eval_psd(const RunConfig& config, const std::optional<fs::path>& synthetic_csv, const Log& log) {
  const corpus::Corpus real = corpus::load_corpus(config.corpus_path());
  const corpus::Corpus synthetic = synthetic_or_generated(config, synthetic_csv, log);

  Report report;
  fs::create_directories(config.report_dir());
  const auto all_real = eval::ensemble_psd(real.profiles);
  report.summary += "real corpus: dominant bin " + std::to_string(eval::dominant_bin(all_real)) + " (" +
                    fixed(all_real.frequencies[eval::dominant_bin(all_real)], 4) + " cycles/hour)\n";

  std::string spectra = "label,source,freq_cph,power\n";
  std::string diffs = "label,freq_cph,log_power_difference\n";
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    const auto label = ConditionLabel::from_index(l);
    const auto r = real.rows_with(label);
    const auto s = synthetic.rows_with(label);
    if (r.empty() || s.empty()) continue;
    const auto real_rows = rows_of(real, r);
    const auto synth_rows = rows_of(synthetic, s);
    const auto cmp = eval::compare_psd(real_rows, synth_rows);
    const auto real_psd = eval::ensemble_psd(real_rows);
    const auto synth_psd = eval::ensemble_psd(synth_rows);
    const auto slug = label_slug(label);
    for (std::size_t k = 0; k < real_psd.power.size(); ++k) {
      spectra += slug + ",real," + corpus::format_double(real_psd.frequencies[k]) + ',' +
                 corpus::format_double(real_psd.power[k]) + '\n';
    }
    for (std::size_t k = 0; k < synth_psd.power.size(); ++k) {
      spectra += slug + ",synthetic," + corpus::format_double(synth_psd.frequencies[k]) + ',' +
                 corpus::format_double(synth_psd.power[k]) + '\n';
    }
    for (std::size_t k = 0; k < cmp.frequencies.size(); ++k) {
      diffs += slug + ',' + corpus::format_double(cmp.frequencies[k]) + ',' +
               corpus::format_double(cmp.log_power_difference[k]) + '\n';
    }
    report.summary += slug + ": peak bin real " + std::to_string(cmp.real_peak_bin) + ", synthetic " +
                      std::to_string(cmp.synthetic_peak_bin) + ", max |log ratio| on daily harmonics " +
                      fixed(cmp.max_abs_diurnal_difference, 3) + '\n';
  }
  write_report(report, config.report_dir() / "psd.csv", spectra);
  write_report(report, config.report_dir() / "psd_compare.csv", diffs);
  finish(report, config.report_dir() / "psd_summary.txt", log);
  return report;
}

Report eval_forecast(const RunConfig& config, const Log& log) {
  const corpus::Corpus real = corpus::load_corpus(config.corpus_path());
  const Model model = load_model(config.model_path());
  const auto results = forecast_transfer(model, real, config, log);

  Report report;
  fs::create_directories(config.report_dir());
  std::string csv = "label,testing_data,mean_pct_error,std_pct_error,windows\n";
  for (const auto& r : results) {
    const auto slug = label_slug(r.label);
    for (const auto& [name, rep] : {std::pair{"real", r.real}, std::pair{"synthetic", r.synthetic}}) {
      csv += slug + ',' + name + ',' + corpus::format_double(rep.mean) + ',' + corpus::format_double(rep.std_dev) +
             ',' + std::to_string(rep.count) + '\n';
    }
    report.summary += slug + ": real " + fixed(r.real.mean, 2) + " +/- " + fixed(r.real.std_dev, 2) + " %, synthetic " +
                      fixed(r.synthetic.mean, 2) + " +/- " + fixed(r.synthetic.std_dev, 2) + " %, gap " +
                      fixed(std::abs(r.real.mean - r.synthetic.mean), 2) + " points\n";
  }
  write_report(report, config.report_dir() / "forecast.csv", csv);
  finish(report, config.report_dir() / "forecast_summary.txt", log);
  return report;
}

// ---------------------------------------------------------------- grid

grid::LoadAssignment assign_profiles(const grid::GridCase& grid, const RunConfig& config, const std::string& source) {
  const auto buses = grid::loaded_buses(grid);
  grid::LoadAssignment out;
  if (source == "generated") {
    const Model model = load_model(config.model_path());
    std::vector<ConditionLabel> labels;
    for (std::size_t k = 0; k < buses.size(); ++k) labels.push_back(ConditionLabel::from_index(k % kLabelCount));
    const auto profiles = cgan::generate(model.generator, labels, config.seed);
    for (std::size_t k = 0; k < buses.size(); ++k) {
      std::vector<double> p(profiles.begin() + static_cast<long>(k * kHoursPerWeek),
                            profiles.begin() + static_cast<long>((k + 1) * kHoursPerWeek));
      for (double& v : p) v = model.scale.inverse(v);
      out[buses[k]] = std::move(p);
    }
    return out;
  }
  if (source != "corpus") fail(ErrorCode::BadConfig, "gridmap source must be 'generated' or 'corpus'");
  const corpus::Corpus c = corpus::load_corpus(config.corpus_path());
  if (c.rows() == 0) fail(ErrorCode::EmptyInput, "corpus is empty");
  std::size_t label = 0;
  std::vector<std::size_t> used(kLabelCount, 0);
  for (int bus : buses) {
    std::vector<std::size_t> rows;
    for (std::size_t tries = 0; tries < kLabelCount && rows.empty(); ++tries, label = (label + 1) % kLabelCount) {
      rows = c.rows_with(ConditionLabel::from_index(label));
      if (!rows.empty()) {
        out[bus] = corpus::unscaled_profile(c, rows[(config.grid_week + used[label]) % rows.size()]);
        ++used[label];
      }
    }
  }
  return out;
}

Report gridmap(const RunConfig& config, const std::string& source, const Log& log) {
  const auto base = grid::load_matpower_case(config.grid_case.string());
  say(log, "case " + config.grid_case.string() + ": " + std::to_string(base.buses.size()) + " buses, " +
               std::to_string(base.generators.size()) + " generators, " + std::to_string(base.branches.size()) +
               " branches");
  const auto assignment = assign_profiles(base, config, source);
  const auto hourly = grid::map_profiles(base, assignment);
  const auto result = grid::feasibility_report(base, hourly);

  Report report;
  fs::create_directories(config.report_dir());
  write_report(report, config.report_dir() / "feasibility.csv", grid::feasibility_csv(result));
  write_report(report, config.report_dir() / "violations.csv", grid::violations_csv(result));
  write_report(report, config.report_dir() / "setpoints.csv", grid::setpoints_csv(base, result));
  std::size_t max_iterations = 0;
  for (const auto& h : result.hours) max_iterations = std::max(max_iterations, h.iterations);
  report.summary = "feasible hours: " + std::to_string(result.feasible_hours()) + "/" +
                   std::to_string(result.hours.size()) + "\nviolations: " + std::to_string(result.violations.size()) +
                   "\nmax Newton iterations: " + std::to_string(max_iterations) + '\n';
  finish(report, config.report_dir() / "gridmap_summary.txt", log);
  return report;
}

}  // namespace loadgan::pipeline
