#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "loadgan/corpus_io.hpp"
#include "loadgan/error.hpp"
#include "loadgan/pipeline.hpp"

namespace fs = std::filesystem;
using namespace loadgan;

int main(int argc, char** argv) {
  CLI::App app{"Conditional GAN load-profile generator and evaluation suite"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<fs::path> config_file, out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_file, "Key-value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Global seed (overrides the config)");
  app.add_option("--out-dir", out_dir, "Output directory (overrides the config)");

  auto* make_corpus = app.add_subcommand("make-corpus", "Build the surrogate corpus or ingest measured series");

  std::optional<fs::path> resume;
  auto* train = app.add_subcommand("train", "Train the cGAN; writes checkpoints and telemetry");
  train->add_option("--resume", resume, "Checkpoint to continue from")->check(CLI::ExistingFile);

  std::string label;
  std::size_t count = 1;
  std::optional<fs::path> checkpoint, output;
  auto* generate = app.add_subcommand("generate", "Generate profiles for one label");
  generate->add_option("--label", label, "e.g. \"summer residential\"")->required();
  generate->add_option("-n,--count", count, "Number of profiles");
  generate->add_option("--checkpoint", checkpoint, "Trained checkpoint (default <out-dir>/checkpoints/last.ckpt)");
  generate->add_option("--output", output, "CSV path (default <out-dir>/generated.csv)");

  std::string which;
  std::optional<fs::path> synthetic;
  auto* eval = app.add_subcommand("eval", "Evaluate synthetic against real profiles");
  eval->add_option("metric", which, "wd | psd | forecast")->required()->check(CLI::IsMember({"wd", "psd", "forecast"}));
  eval->add_option("--synthetic", synthetic, "Profile CSV to evaluate instead of generating")->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", checkpoint, "Trained checkpoint");

  std::string source = "generated";
  std::optional<fs::path> grid_case;
  auto* gridmap = app.add_subcommand("gridmap", "Map one week of profiles onto a grid case and check feasibility");
  gridmap->add_option("--source", source, "generated | corpus")->check(CLI::IsMember({"generated", "corpus"}));
  gridmap->add_option("--case", grid_case, "MATPOWER case file")->check(CLI::ExistingFile);
  gridmap->add_option("--checkpoint", checkpoint, "Trained checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "BadConfig: " << e.what() << '\n';
    return 2;
  }

  const pipeline::Log log = [](const std::string& line) { std::cout << line << std::endl; };
  try {
    pipeline::RunConfig config = pipeline::load_run_config(config_file, seed, out_dir);
    if (grid_case) config.grid_case = *grid_case;
    if (checkpoint) config.model = *checkpoint;

    if (*make_corpus) {
      pipeline::make_corpus(config, log);
    } else if (*train) {
      pipeline::train(config, resume, log);
    } else if (*generate) {
      const auto model = pipeline::load_model(config.model_path());
      const auto c = pipeline::generate_corpus(model, corpus::ConditionLabel::parse(label), count, config.seed);
      const fs::path path = output.value_or(config.out_dir / "generated.csv");
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      corpus::save_corpus(path, c, {{"seed", std::to_string(config.seed)}, {"label", label}});
      log("wrote " + std::to_string(count) + " profiles to " + path.string());
    } else if (*eval) {
      if (which == "wd") pipeline::eval_wd(config, synthetic, log);
      if (which == "psd") pipeline::eval_psd(config, synthetic, log);
      if (which == "forecast") pipeline::eval_forecast(config, log);
    } else if (*gridmap) {
      pipeline::gridmap(config, source, log);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "IoError: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
