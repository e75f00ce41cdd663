// Copyright 2026 The spikefl Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// spikefl: train, sweep, report and plot federated SNN experiments.
//
// Exit status: 0 success, 1 runtime or numeric abort, 2 configuration or
// usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spikefl/app/config.hpp"
#include "spikefl/app/plot.hpp"
#include "spikefl/app/report.hpp"
#include "spikefl/app/runner.hpp"

namespace fs = std::filesystem;
using namespace spikefl;

namespace {

constexpr const char* kOutRootEnv = "SPIKEFL_OUT_ROOT";

// --out, then output.dir, then $SPIKEFL_OUT_ROOT/<config stem>, then
// runs/<config stem>.
fs::path output_dir(const std::string& out_flag, const app::ExperimentConfig& cfg,
                    const fs::path& config_path) {
  if (!out_flag.empty()) return out_flag;
  if (!cfg.output_dir.empty()) return app::resolve(cfg, cfg.output_dir);
  const char* root = std::getenv(kOutRootEnv);
  return fs::path(root && *root ? root : "runs") / config_path.stem();
}

app::ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
  auto cfg = app::load_config(path);
  if (seed) cfg.fl.seed = *seed;
  return cfg;
}

std::vector<app::RunSeries> load_runs(const std::vector<std::string>& dirs) {
  std::vector<app::RunSeries> runs;
  for (const auto& d : dirs) runs.push_back(app::load_run(d));
  return runs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Federated spiking-network simulator with sparse, noisy links"};
  cli.require_subcommand(1);

  std::string config_path, out, plot_out, axis, values, field;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1, workers = 0;
  std::vector<std::string> run_dirs;
  std::string fraction = "excl", thresholds;

  auto* train = cli.add_subcommand("train", "Run one experiment");
  train->add_option("--config", config_path, "Experiment file")->required();
  train->add_option("--out", out, "Run directory");
  train->add_option("--seed", seed, "Master seed (overrides the config)");
  train->add_option("--jobs", workers, "Threads simulating clients (fl.workers)");

  auto* sweep = cli.add_subcommand("sweep", "Run one experiment per axis value");
  sweep->add_option("--config", config_path, "Experiment file")->required();
  sweep->add_option("--axis", axis, "Numeric config key, e.g. compression.kappa")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", out, "Sweep root directory");
  sweep->add_option("--seed", seed, "Master seed (overrides the config)");
  sweep->add_option("--jobs", jobs, "Runs executed concurrently")->check(CLI::PositiveNumber);

  auto* report = cli.add_subcommand("report", "Bandwidth-for-accuracy table");
  report->add_option("runs", run_dirs, "Run directories")->required();
  report->add_option("--out", out, "Also write the table as CSV here");
  report->add_option("--fraction", fraction, "excl or incl")
      ->check(CLI::IsMember({"excl", "incl"}));
  report->add_option("--thresholds", thresholds, "Comma-separated accuracies in [0,1]");

  auto* plot = cli.add_subcommand("plot", "SVG line chart of one metrics column");
  plot->add_option("runs", run_dirs, "Run directories")->required();
  plot->add_option("--field", field, "metrics.csv column")->default_val("test_acc");
  plot->add_option("--out", plot_out, "Output SVG")->default_val("plot.svg");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      auto cfg = load(config_path, seed);
      if (workers) cfg.fl.workers = workers;
      app::validate(cfg);
      const fs::path dir = output_dir(out, cfg, config_path);
      std::cerr << "writing " << dir.string() << '\n';
      const auto outcome = app::run_experiment(cfg, dir, &std::cerr);
      if (outcome.exit_code != 0) std::cerr << "error: " << outcome.error << '\n';
      return outcome.exit_code;
    }
    if (*sweep) {
      const auto cfg = load(config_path, seed);
      const fs::path dir = output_dir(out, cfg, config_path);
      const auto entries = app::run_sweep(cfg, axis, app::detail::split_list(values),
                                          dir, jobs, &std::cerr);
      std::cout << (dir / "summary.csv").string() << '\n';
      int code = 0;
      for (const auto& e : entries)
        if (e.outcome.exit_code != 0) {
          std::cerr << "error: " << axis << "=" << e.value << ": " << e.outcome.error << '\n';
          code = 1;
        }
      return code;
    }
    if (*report) {
      std::vector<double> t = app::default_thresholds();
      if (!thresholds.empty()) {
        t.clear();
        for (const auto& s : app::detail::split_list(thresholds))
          t.push_back(app::detail::parse_double("--thresholds", s));
      }
      const auto rep = app::build_report(
          load_runs(run_dirs), t,
          fraction == "incl" ? app::FractionKind::Inclusive : app::FractionKind::Exclusive);
      std::cout << app::render_text(rep);
      if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw InputError("cannot write " + out);
        f << app::render_csv(rep);
      }
      return 0;
    }
    if (*plot) {
      app::write_svg(plot_out, load_runs(run_dirs), field);
      std::cout << plot_out << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
