// Runs the full pipeline twice on the surrogate corpus and prints one
// pass/fail line per acceptance criterion.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "loadgan/cgan.hpp"
#include "loadgan/corpus_io.hpp"
#include "loadgan/dsp.hpp"
#include "loadgan/error.hpp"
#include "loadgan/eval/psd.hpp"
#include "loadgan/eval/wasserstein.hpp"
#include "loadgan/grid/case.hpp"
#include "loadgan/grid/powerflow.hpp"
#include "loadgan/kmeans.hpp"
#include "loadgan/nn/adam.hpp"
#include "loadgan/nn/grad_check.hpp"
#include "loadgan/nn/layers.hpp"
#include "loadgan/nn/ops.hpp"
#include "loadgan/pipeline.hpp"
#include "loadgan/random.hpp"
#include "loadgan/surrogate.hpp"

using namespace loadgan;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "[x] ") + note);
  }
};

std::string num(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

nn::Tensor random_tensor(nn::Shape shape, Rng& rng, bool requires_grad = true, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(nn::shape_size(shape));
  for (double& x : v) x = g(rng);
  return nn::Tensor::from(std::move(shape), std::move(v), requires_grad);
}

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

nn::Tensor one_hot_batch(std::size_t rows) {
  std::vector<double> v;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto oh = corpus::ConditionLabel::from_index(r % corpus::kLabelCount).one_hot();
    v.insert(v.end(), oh.begin(), oh.end());
  }
  return nn::Tensor::from({rows, corpus::kLabelWidth}, v);
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::istringstream in(corpus::read_text_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    rows.push_back(std::move(fields));
  }
  return rows;
}

// ------------------------------------------------------------------ runs

struct RunTimes {
  double train_seconds = 0.0;
  double total_seconds = 0.0;
};

RunTimes run_pipeline(const pipeline::RunConfig& config) {
  RunTimes times;
  const auto t0 = Clock::now();
  const pipeline::Log log = [&](const std::string& line) {
    std::cout << "    [" << config.out_dir.filename().string() << "] " << line << std::endl;
  };
  fs::remove_all(config.out_dir);
  pipeline::make_corpus(config, log);
  const auto t_train = Clock::now();
  pipeline::train(config, std::nullopt, log);
  times.train_seconds = seconds_since(t_train);
  const auto model = pipeline::load_model(config.model_path());
  corpus::write_text_file(config.out_dir / "generated.csv", pipeline::generate_csv(model, "summer residential", 1000, config.seed));
  pipeline::eval_wd(config, std::nullopt, log);
  pipeline::eval_psd(config, std::nullopt, log);
  pipeline::eval_forecast(config, log);
  pipeline::gridmap(config, "generated", log);
  times.total_seconds = seconds_since(t0);
  return times;
}

// -------------------------------------------------------------- criteria

Outcome gradient_checks() {
  Outcome out;
  Rng rng = make_rng(101);
  const auto check = [&](const std::string& name, const nn::GradCheckResult& r, double bound) {
    out.require(r.entries_checked > 0 && r.max_relative_error < bound,
                name + " " + num(r.max_relative_error, 2) + " (< " + num(bound, 1) + ", " +
                    std::to_string(r.entries_checked) + " entries)");
  };

  {
    auto x = random_tensor({4, 7}, rng), w = random_tensor({5, 7}, rng), b = random_tensor({5}, rng);
    const auto wt = random_values(20, rng);
    check("dense", nn::grad_check([&] { return nn::weighted_sum(nn::linear(x, w, b), wt); }, {x, w, b}), 1e-5);
  }
  {
    auto x = random_tensor({2, 3, 20}, rng), w = random_tensor({4, 3, 8}, rng), b = random_tensor({4}, rng);
    const auto wt = random_values(2 * 4 * nn::conv1d_output_length(20, 8, 2, 3), rng);
    check("conv", nn::grad_check([&] { return nn::weighted_sum(nn::conv1d(x, w, b, 2, 3), wt); }, {x, w, b}), 1e-5);
  }
  {
    auto x = random_tensor({2, 4, 6}, rng), w = random_tensor({4, 3, 4}, rng), b = random_tensor({3}, rng);
    const auto wt = random_values(2 * 3 * 12, rng);
    check("tconv",
          nn::grad_check([&] { return nn::weighted_sum(nn::conv_transpose1d(x, w, b, 2, 1), wt); }, {x, w, b}), 1e-5);
  }
  {
    auto x = random_tensor({3, 10}, rng);
    const auto wt = random_values(30, rng);
    double worst = 0.0;
    std::size_t entries = 0;
    for (auto act : {nn::Activation::Relu, nn::Activation::LeakyRelu, nn::Activation::Sigmoid, nn::Activation::Tanh}) {
      const auto r = nn::grad_check([&] { return nn::weighted_sum(nn::activate(x, act), wt); }, {x});
      worst = std::max(worst, r.max_relative_error);
      entries += r.entries_checked;
    }
    check("activations", {worst, entries}, 1e-4);
  }
  {
    const nn::Layer layer(nn::LayerSpec::lstm(3, 5), rng);
    std::vector<nn::Tensor> xs;
    for (int t = 0; t < 4; ++t) xs.push_back(random_tensor({2, 3}, rng));
    auto h0 = random_tensor({2, 5}, rng, true, 0.5), c0 = random_tensor({2, 5}, rng, true, 0.5);
    const auto wt = random_values(20, rng);
    auto wrt = layer.parameters();
    wrt.insert(wrt.end(), xs.begin(), xs.end());
    wrt.push_back(h0);
    wrt.push_back(c0);
    check("lstm", nn::grad_check(
                      [&] {
                        nn::Layer::LstmState s{h0, c0};
                        for (const auto& x : xs) s = layer.step(x, s);
                        return nn::weighted_sum(nn::concat_columns(s.h, s.c), wt);
                      },
                      wrt),
          1e-4);
  }
  {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<double> pv(12), t(12);
    for (std::size_t i = 0; i < 12; ++i) {
      pv[i] = u(rng);
      t[i] = i % 3 == 0 ? 1.0 : 0.0;
    }
    auto p = nn::Tensor::from({12}, pv, true);
    nn::GradCheckOptions opt;
    opt.eps = 1e-6;
    check("bce", nn::grad_check([&] { return nn::bce_loss(p, t); }, {p}, opt), 1e-4);
  }

  nn::GradCheckOptions stack;
  stack.eps = 1e-5;
  stack.max_entries_per_tensor = 16;
  {
    Rng init = make_rng(102);
    const cgan::Generator g(init);
    const auto z = random_tensor({3, cgan::kNoiseDim}, rng, false);
    const auto y = one_hot_batch(3);
    const auto wt = random_values(3 * corpus::kHoursPerWeek, rng);
    check("generator stack", nn::grad_check([&] { return nn::weighted_sum(g.forward(z, y), wt); }, g.parameters(), stack),
          1e-4);
  }
  {
    Rng init = make_rng(103);
    const cgan::Discriminator d(init);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xv(3 * corpus::kHoursPerWeek);
    for (double& v : xv) v = u(rng);
    const auto x = nn::Tensor::from({3, corpus::kHoursPerWeek}, xv);
    const auto y = one_hot_batch(3);
    const std::vector<double> targets = {1.0, 0.0, 1.0};
    check("discriminator stack",
          nn::grad_check([&] { return nn::bce_loss(nn::reshape(d.forward(x, y), {3}), targets); }, d.parameters(), stack),
          1e-4);
  }
  return out;
}

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

Outcome oracles() {
  Outcome out;
  Rng rng = make_rng(201);
  std::uniform_int_distribution<std::size_t> size(1, 7);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int pair = 0; pair < 200; ++pair) {
    const std::size_t n = size(rng);
    std::vector<double> a(n), b(n);
    for (double& v : a) v = g(rng);
    for (double& v : b) v = 2.0 * g(rng) + 0.5;
    worst = std::max(worst, std::abs(eval::wasserstein1(a, b) - brute_force_w1(a, b)));
  }
  out.require(worst <= 1e-12, "W1 vs assignment on 200 pairs: max gap " + num(worst, 2) + " (<= 1e-12)");

  const nn::AdamConfig cfg{0.05, 0.5, 0.999, 1e-8};
  const std::vector<double> target = {3.0, -1.0, 0.25, 10.0, -7.5}, weight = {1.0, 0.5, 4.0, 0.1, 2.0};
  auto w = nn::Tensor::from({5}, std::vector<double>(5, 0.0), true);
  nn::Adam opt({w}, cfg);
  std::vector<double> ow(5, 0.0), om(5, 0.0), ov(5, 0.0);
  double adam_gap = 0.0;
  for (int t = 1; t <= 100; ++t) {
    opt.zero_grad();
    const auto diff = nn::add(w, nn::Tensor::from({5}, {-3.0, 1.0, -0.25, -10.0, 7.5}));
    nn::weighted_sum(nn::mul(diff, diff), weight).backward();
    opt.step();
    for (std::size_t i = 0; i < 5; ++i) {
      const double grad = 2.0 * weight[i] * (ow[i] - target[i]);
      om[i] = cfg.beta1 * om[i] + (1.0 - cfg.beta1) * grad;
      ov[i] = cfg.beta2 * ov[i] + (1.0 - cfg.beta2) * grad * grad;
      const double mh = om[i] / (1.0 - std::pow(cfg.beta1, t));
      const double vh = ov[i] / (1.0 - std::pow(cfg.beta2, t));
      ow[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon);
      adam_gap = std::max(adam_gap, std::abs(w.values()[i] - ow[i]));
    }
  }
  out.require(adam_gap <= 1e-10, "Adam vs scalar oracle over 100 steps: max gap " + num(adam_gap, 2) + " (<= 1e-10)");

  struct Geometry {
    std::size_t c_in, c_out, length, kernel, stride, padding;
  };
  double adjoint_gap = 0.0;
  std::size_t cases = 0;
  for (const Geometry geo : {Geometry{16, 32, 42, 4, 2, 1}, Geometry{8, 16, 84, 4, 2, 1}, Geometry{1, 8, 168, 4, 2, 1},
                             Geometry{1, 16, 168, 8, 2, 3}, Geometry{3, 2, 17, 5, 3, 2}, Geometry{4, 4, 30, 3, 1, 1}}) {
    const auto x = random_tensor({2, geo.c_in, geo.length}, rng, false);
    const auto w = random_tensor({geo.c_out, geo.c_in, geo.kernel}, rng, false);
    const auto cx = nn::conv1d(x, w, nn::Tensor{}, geo.stride, geo.padding);
    const auto y = random_tensor({2, geo.c_out, cx.dim(2)}, rng, false);
    const auto ty = nn::conv_transpose1d(y, w, nn::Tensor{}, geo.stride, geo.padding);
    if (ty.dim(2) != geo.length) continue;
    const double lhs = std::inner_product(cx.values().begin(), cx.values().end(), y.values().begin(), 0.0);
    const double rhs = std::inner_product(x.values().begin(), x.values().end(), ty.values().begin(), 0.0);
    adjoint_gap = std::max(adjoint_gap, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    ++cases;
  }
  out.require(cases >= 5 && adjoint_gap <= 1e-10, "tconv adjoint identity on " + std::to_string(cases) +
                                                      " geometries: max relative gap " + num(adjoint_gap, 2) +
                                                      " (<= 1e-10)");
  return out;
}

Outcome psd_checks(const corpus::Corpus& real) {
  Outcome out;
  std::vector<double> tone(corpus::kHoursPerWeek);
  for (std::size_t t = 0; t < tone.size(); ++t) tone[t] = 1.0 + std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 24.0);
  const auto s = eval::ensemble_psd(tone);
  double off_peak = 0.0, total = 0.0;
  for (std::size_t k = 1; k < s.power.size(); ++k) {
    total += s.power[k];
    if (k != 7) off_peak += s.power[k];
  }
  out.require(eval::dominant_bin(s) == 7 && off_peak <= 1e-12 * total,
              "24 h sinusoid: peak bin " + std::to_string(eval::dominant_bin(s)) + " at " +
                  num(s.frequencies[eval::dominant_bin(s)], 4) + " cycles/hour, off-peak share " +
                  num(off_peak / total, 2));

  double worst = 0.0;
  for (std::size_t r = 0; r < real.rows(); ++r) {
    const auto p = real.profile(r);
    const auto pg = dsp::one_sided_periodogram(p);
    const double mu = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
    double var = 0.0;
    for (double v : p) var += (v - mu) * (v - mu);
    var /= static_cast<double>(p.size());
    worst = std::max(worst, std::abs(std::accumulate(pg.begin(), pg.end(), 0.0) - var));
  }
  out.require(worst <= 1e-9, "Parseval on " + std::to_string(real.rows()) + " profiles: max gap " + num(worst, 2));

  const auto corpus_psd = eval::ensemble_psd(real.profiles);
  const auto peak = eval::dominant_bin(corpus_psd);
  out.require(peak == 7, "surrogate corpus peak bin " + std::to_string(peak) + " (" +
                             num(corpus_psd.frequencies[peak], 4) + " cycles/hour)");
  return out;
}

Outcome convergence(const pipeline::RunConfig& config, const corpus::Corpus& real, const RunTimes& times) {
  Outcome out;
  const auto t = cgan::parse_telemetry_csv(corpus::read_text_file(config.report_dir() / "telemetry.csv"));
  out.require(real.rows() >= 1200, "corpus profiles " + std::to_string(real.rows()) + " (>= 1200)");
  out.require(!t.empty() && t.size() <= 3000, "epochs " + std::to_string(t.size()) + " (<= 3000)");
  if (t.empty()) return out;
  const auto& last = t.back();
  const auto in_band = [](double v) { return v >= 0.4 && v <= 0.6; };
  out.require(in_band(last.d_train) && in_band(last.d_val) && in_band(last.d_fake),
              "final D(train) " + num(last.d_train) + ", D(val) " + num(last.d_val) + ", D(fake) " + num(last.d_fake) +
                  " (in [0.4, 0.6])");
  out.require(std::abs(last.d_val - last.d_fake) <= 0.05,
              "|D(val) - D(fake)| " + num(std::abs(last.d_val - last.d_fake)) + " (<= 0.05)");
  out.require(last.w1 <= 0.2 * t.front().w1, "W1 final/epoch-0 " + num(last.w1, 3) + "/" + num(t.front().w1, 3) +
                                                  " = " + num(last.w1 / t.front().w1, 3) + " (<= 0.2)");
  out.require(times.train_seconds <= 7200.0, "training time " + num(times.train_seconds / 60.0, 3) + " min (<= 120)");
  return out;
}

Outcome conditional_fidelity(const pipeline::RunConfig& config) {
  Outcome out;
  std::map<std::string, std::map<std::string, double>> w;
  for (const auto& row : read_csv_rows(config.report_dir() / "wd_matrix.csv")) w[row[0]][row[1]] = std::stod(row[2]);
  std::size_t separated = 0;
  std::string misses;
  for (const auto& [generated, row] : w) {
    bool ok = row.count(generated) > 0;
    for (const auto& [real, value] : row) {
      if (real != generated && ok && !(row.at(generated) < value)) ok = false;
    }
    if (ok) {
      ++separated;
    } else {
      misses += " " + generated;
    }
  }
  out.require(w.size() == corpus::kLabelCount && separated == corpus::kLabelCount,
              "labels closest to own real class " + std::to_string(separated) + "/" + std::to_string(w.size()) +
                  (misses.empty() ? "" : " (misses:" + misses + ")"));

  std::size_t bin = 0, best_bin = 0;
  double best = -1.0;
  for (const auto& row : read_csv_rows(config.report_dir() / "psd.csv")) {
    if (row[0] != "summer_residential" || row[1] != "synthetic") continue;
    const double power = std::stod(row[3]);
    if (bin > 0 && power > best) {
      best = power;
      best_bin = bin;
    }
    ++bin;
  }
  out.require(best_bin == 7, "generated summer residential PSD peak bin " + std::to_string(best_bin));
  return out;
}

Outcome forecast_transfer(const pipeline::RunConfig& config) {
  Outcome out;
  std::map<std::string, std::map<std::string, double>> mean;
  for (const auto& row : read_csv_rows(config.report_dir() / "forecast.csv")) mean[row[0]][row[1]] = std::stod(row[2]);
  out.require(config.forecast.hidden == 48 && config.forecast.layers == 3 && config.forecast.window == 48,
              "LSTM " + std::to_string(config.forecast.layers) + "x" + std::to_string(config.forecast.hidden) +
                  ", window " + std::to_string(config.forecast.window));
  out.require(!mean.empty(), std::to_string(mean.size()) + " labels evaluated");
  for (const auto& [label, m] : mean) {
    const double real = m.at("real"), synthetic = m.at("synthetic");
    out.require(std::abs(real - synthetic) <= 3.0 && real <= 15.0 && synthetic <= 15.0,
                label + ": real " + num(real, 4) + " %, synthetic " + num(synthetic, 4) + " %, gap " +
                    num(std::abs(real - synthetic), 3) + " points");
  }
  return out;
}

Outcome throughput(const pipeline::RunConfig& config) {
  Outcome out;
  const auto model = pipeline::load_model(config.model_path());
  const corpus::ConditionLabel label{corpus::Season::Summer, corpus::LoadType::Residential};
  cgan::generate(model.generator, label, 1000, config.seed);
  double slowest = 0.0;
  std::size_t produced = 0;
  for (int trial = 0; trial < 3; ++trial) {
    const auto t0 = Clock::now();
    produced = cgan::generate(model.generator, label, 1000, config.seed + static_cast<std::uint64_t>(trial)).size();
    slowest = std::max(slowest, seconds_since(t0));
  }
  out.require(produced == 1000 * corpus::kHoursPerWeek && slowest < 1.0,
              "1000 profiles in " + num(slowest, 3) + " s (slowest of 3, < 1 s)");
  return out;
}

Outcome grid_feasibility(const pipeline::RunConfig& config, const fs::path& data_dir) {
  Outcome out;
  const auto base = grid::load_matpower_case((data_dir / "case14.m").string());
  out.require(base.buses.size() == 14 && base.generators.size() == 5 && base.branches.size() == 20,
              "case14 counts " + std::to_string(base.buses.size()) + "/" + std::to_string(base.generators.size()) +
                  "/" + std::to_string(base.branches.size()) + " buses/gens/branches");
  const auto pf = grid::newton_pf(base);
  out.require(pf.converged && pf.iterations <= 10 && pf.max_mismatch < 1e-6,
              "base-case Newton PF: " + std::to_string(pf.iterations) + " iterations, mismatch " +
                  num(pf.max_mismatch, 2));
  double worst = 0.0;
  std::size_t compared = 0;
  for (const auto& row : read_csv_rows(data_dir / "case14_solution.csv")) {
    worst = std::max(worst, std::abs(pf.vm[base.bus_index(std::stoi(row[0]))] - std::stod(row[1])));
    ++compared;
  }
  out.require(compared == 14 && worst <= 1e-3,
              "Vm vs published solution on " + std::to_string(compared) + " buses: max gap " + num(worst, 2));
  std::ifstream summary(config.report_dir() / "gridmap_summary.txt");
  std::string first;
  std::getline(summary, first);
  out.require(first == "feasible hours: 168/168", "generated week: " + first);
  return out;
}

std::vector<fs::path> tree(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome determinism(const fs::path& a, const fs::path& b) {
  Outcome out;
  const auto files_a = tree(a), files_b = tree(b);
  out.require(files_a == files_b, std::to_string(files_a.size()) + " vs " + std::to_string(files_b.size()) + " files");
  std::size_t identical = 0;
  std::string differing;
  for (const auto& f : files_a) {
    if (!fs::exists(b / f)) continue;
    if (corpus::read_text_file(a / f) == corpus::read_text_file(b / f)) {
      ++identical;
    } else {
      differing += " " + f.string();
    }
  }
  out.require(identical == files_a.size(), std::to_string(identical) + "/" + std::to_string(files_a.size()) +
                                               " byte-identical (corpus, checkpoints, generated CSV, reports)" +
                                               (differing.empty() ? "" : "; differ:" + differing));
  return out;
}

Outcome labeling(const pipeline::RunConfig& config) {
  Outcome out;
  const auto s = corpus::make_surrogate_corpus(config.surrogate);
  const auto labels = corpus::label_load_types(corpus::profiles_from_series(s.series), config.seed);
  std::size_t correct = 0;
  for (const auto& [id, type] : s.true_types) correct += labels.types.at(id) == type ? 1 : 0;
  const double share = static_cast<double>(correct) / static_cast<double>(s.true_types.size());
  out.require(share >= 0.9, "recovered " + std::to_string(correct) + "/" + std::to_string(s.true_types.size()) +
                                " load types (" + num(100.0 * share, 3) + " %, >= 90 %)");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run"};
  fs::path config_file, work_dir = "acceptance_work", data_dir = "data";
  bool reuse = false;
  app.add_option("--config", config_file, "Key-value config for both runs")->required()->check(CLI::ExistingFile);
  app.add_option("--work-dir", work_dir, "Directory for the two runs");
  app.add_option("--data-dir", data_dir, "Directory holding case14.m and case14_solution.csv");
  app.add_flag("--reuse", reuse, "Keep an existing first run instead of recomputing it");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto base = pipeline::load_run_config(config_file, std::nullopt, std::nullopt);
    auto config_a = base, config_b = base;
    config_a.out_dir = work_dir / "run_a";
    config_b.out_dir = work_dir / "run_b";
    config_a.grid_case = config_b.grid_case = data_dir / "case14.m";

    std::map<int, std::pair<std::string, Outcome>> results;
    const auto record = [&](int id, const std::string& name, Outcome o) { results[id] = {name, std::move(o)}; };
    record(1, "gradient correctness", gradient_checks());
    record(2, "oracle equivalence", oracles());
    record(10, "labeling recovery", labeling(base));

    RunTimes times;
    const fs::path times_file = work_dir / "run_a_train_seconds.txt";
    if (reuse && fs::exists(config_a.report_dir() / "gridmap_summary.txt") && fs::exists(times_file)) {
      times.train_seconds = std::stod(corpus::read_text_file(times_file));
      std::cout << "reusing " << config_a.out_dir << std::endl;
    } else {
      times = run_pipeline(config_a);
      corpus::write_text_file(times_file, num(times.train_seconds, 10) + '\n');
      std::cout << "first run: " << num(times.total_seconds / 60.0, 3) << " min (training "
                << num(times.train_seconds / 60.0, 3) << " min)" << std::endl;
    }
    const auto real = corpus::load_corpus(config_a.corpus_path());
    record(3, "PSD correctness", psd_checks(real));
    record(4, "training convergence", convergence(config_a, real, times));
    record(5, "conditional fidelity", conditional_fidelity(config_a));
    record(6, "forecast transfer", forecast_transfer(config_a));
    record(7, "generation throughput", throughput(config_a));
    record(8, "grid feasibility", grid_feasibility(config_a, data_dir));

    const auto times_b = run_pipeline(config_b);
    std::cout << "second run: " << num(times_b.total_seconds / 60.0, 3) << " min" << std::endl;
    record(9, "determinism", determinism(config_a.out_dir, config_b.out_dir));

    std::size_t passed = 0;
    std::cout << '\n';
    for (const auto& [id, entry] : results) {
      const auto& [name, o] = entry;
      std::string detail;
      for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
      std::printf("criterion %2d %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
      passed += o.pass ? 1 : 0;
    }
    std::printf("%zu/%zu criteria passed\n", passed, results.size());
    return passed == results.size() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}
