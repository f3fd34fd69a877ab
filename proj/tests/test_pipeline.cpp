#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "loadgan/corpus_io.hpp"
#include "loadgan/error.hpp"
#include "loadgan/pipeline.hpp"

using namespace loadgan;
using namespace loadgan::pipeline;
namespace fs = std::filesystem;
using corpus::ConditionLabel;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("loadgan_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::NumericError;
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

RunConfig small_run(const fs::path& dir, std::size_t epochs) {
  return RunConfig::from_key_values({{"out_dir", dir.string()},
                                     {"loads", "4"},
                                     {"weeks", "25"},
                                     {"epochs", std::to_string(epochs)},
                                     {"checkpoint_every", "2"},
                                     {"grid_case", std::string(LOADGAN_DATA_DIR) + "/case14.m"}});
}

// A corpus and a briefly trained model shared by the generation tests.
const RunConfig& trained_run() {
  static const RunConfig config = [] {
    auto c = small_run(scratch("trained"), 4);
    make_corpus(c);
    train(c);
    return c;
  }();
  return config;
}

}  // namespace

TEST(RunConfig, DefaultsAndOverrides) {
  const auto c = load_run_config(std::nullopt, 7, fs::path("elsewhere"));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_EQ(c.surrogate.seed, 7u);
  EXPECT_EQ(c.forecast.seed, 7u);
  EXPECT_EQ(c.out_dir, fs::path("elsewhere"));
  EXPECT_EQ(c.model_path(), fs::path("elsewhere/checkpoints/last.ckpt"));
  EXPECT_EQ(c.forecast_labels.size(), 2u);
}

TEST(RunConfig, Rejections) {
  EXPECT_EQ(code_of([] { RunConfig::from_key_values({{"loads", "0"}}); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { RunConfig::from_key_values({{"epochz", "3"}}); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { RunConfig::from_key_values({{"forecast_labels", " ; "}}); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { RunConfig::from_key_values({{"forecast_labels", "autumn residential"}}); }),
            ErrorCode::UnknownLabel);
}

TEST(MakeCorpus, DefaultSurrogateWithManifestIsReproducible) {
  const auto dir = scratch("corpus");
  const auto config = load_run_config(std::nullopt, std::nullopt, dir);
  const auto c = make_corpus(config);
  EXPECT_EQ(c.rows(), 1248u);
  const auto csv = corpus::read_text_file(config.corpus_path());
  EXPECT_EQ(line_count(csv), 1249u);
  const auto manifest = corpus::manifest_path_for(config.corpus_path());
  ASSERT_TRUE(fs::exists(manifest));
  const auto manifest_text = corpus::read_text_file(manifest);
  make_corpus(config);
  EXPECT_EQ(corpus::read_text_file(config.corpus_path()), csv);
  EXPECT_EQ(corpus::read_text_file(manifest), manifest_text);
}

TEST(Train, SmokeRunWritesOneTelemetryRowPerEpoch) {
  const auto config = small_run(scratch("smoke"), 50);
  EXPECT_EQ(make_corpus(config).rows(), 100u);
  const auto state = train(config);
  EXPECT_EQ(state.completed_epochs, 50u);
  const auto telemetry = cgan::parse_telemetry_csv(corpus::read_text_file(config.report_dir() / "telemetry.csv"));
  ASSERT_EQ(telemetry.size(), 50u);
  for (std::size_t e = 0; e < telemetry.size(); ++e) EXPECT_EQ(telemetry[e].epoch, e);
  EXPECT_TRUE(fs::exists(config.model_path()));
}

TEST(Train, ResumeMatchesUninterruptedRun) {
  const auto config = small_run(scratch("resume"), 4);
  make_corpus(config);
  train(config);
  const auto full = corpus::read_text_file(config.model_path());
  const auto full_telemetry = corpus::read_text_file(config.report_dir() / "telemetry.csv");
  const auto midway = config.out_dir / "epoch_2.ckpt";
  fs::copy_file(config.checkpoint_dir() / "epoch_2.ckpt", midway);
  fs::remove_all(config.checkpoint_dir());
  train(config, midway);
  EXPECT_EQ(corpus::read_text_file(config.model_path()), full);
  EXPECT_EQ(corpus::read_text_file(config.report_dir() / "telemetry.csv"), full_telemetry);

  auto other_seed = config;
  other_seed.train.seed = config.train.seed + 1;
  EXPECT_EQ(code_of([&] { train(other_seed, midway); }), ErrorCode::BadConfig);
}

TEST(Generate, LabelCountsAndErrors) {
  const auto model = load_model(trained_run().model_path());
  const auto four = generate_csv(model, "summer residential", 4, 1);
  EXPECT_EQ(line_count(four), 5u);
  std::istringstream in(four);
  const auto parsed = corpus::read_profile_csv(in);
  ASSERT_EQ(parsed.rows(), 4u);
  for (const auto& l : parsed.labels) EXPECT_EQ(l.name(), "summer residential");
  EXPECT_EQ(generate_csv(model, "summer residential", 4, 1), four);

  const auto none = generate_csv(model, "summer residential", 0, 1);
  EXPECT_EQ(line_count(none), 1u);
  EXPECT_EQ(code_of([&] { generate_csv(model, "autumn residential", 4, 1); }), ErrorCode::UnknownLabel);
}

TEST(Eval, WassersteinOfIdenticalFilesIsZero) {
  const auto& config = trained_run();
  const auto report = eval_wd(config, config.corpus_path());
  const auto real = corpus::load_corpus(config.corpus_path());
  const auto m = wasserstein_matrix(real, real);
  for (std::size_t l = 0; l < corpus::kLabelCount; ++l) {
    if (m.real_counts[l] > 0) EXPECT_EQ(m.at(l, l), 0.0);
  }
  EXPECT_TRUE(fs::exists(config.report_dir() / "wd_matrix.csv"));
  EXPECT_NE(report.summary.find("closest to their own real class"), std::string::npos);
}

TEST(Eval, PsdOfDailySinusoidPeaksAtDailyBin) {
  const auto dir = scratch("psd");
  auto config = load_run_config(std::nullopt, std::nullopt, dir);
  corpus::Corpus c;
  const ConditionLabel label{corpus::Season::Summer, corpus::LoadType::Residential};
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t t = 0; t < corpus::kHoursPerWeek; ++t) {
      c.profiles.push_back(0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t + r) / 24.0));
    }
    c.labels.push_back(label);
    c.meta.push_back({"fixture", corpus::make_date(2017, 6, 5), 1.0});
  }
  corpus::save_corpus(config.corpus_path(), c);
  const auto report = eval_psd(config, config.corpus_path());
  EXPECT_NE(report.summary.find("dominant bin 7 "), std::string::npos) << report.summary;
  EXPECT_NE(report.summary.find("peak bin real 7, synthetic 7"), std::string::npos) << report.summary;
}

TEST(Gridmap, MalformedCaseIsAParseError) {
  const auto dir = scratch("badcase");
  auto config = load_run_config(std::nullopt, std::nullopt, dir);
  config.grid_case = dir / "broken.m";
  corpus::write_text_file(config.grid_case, "function mpc = broken\nmpc.bus = [\n 1 3 0 0;\n");
  EXPECT_EQ(code_of([&] { gridmap(config, "corpus"); }), ErrorCode::ParseError);
}

TEST(Gridmap, CorpusWeekOnBundledCase) {
  const auto& config = trained_run();
  const auto report = gridmap(config, "corpus");
  EXPECT_NE(report.summary.find("feasible hours: 168/168"), std::string::npos) << report.summary;
  EXPECT_EQ(line_count(corpus::read_text_file(config.report_dir() / "feasibility.csv")), 169u);
  const auto generated = gridmap(config, "generated");
  EXPECT_NE(generated.summary.find("/168"), std::string::npos);
}
