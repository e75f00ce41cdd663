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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spikefl/app/config.hpp"
#include "spikefl/app/metrics.hpp"
#include "spikefl/app/plot.hpp"
#include "spikefl/app/report.hpp"
#include "spikefl/app/runner.hpp"

using namespace spikefl;
using namespace spikefl::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "spikefl_test_app" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kTiny = R"(
label = tiny
seed = 5
[model]
layers = 8, 12, 3
timesteps = 4
[fl]
clients = 2
rounds = 2
batch_size = 16
[compression]
mode = fixed
kappa = 0.5
[data]
source = synthetic
synthetic.classes = 3
synthetic.features = 8
synthetic.train = 90
synthetic.test = 30
)";

fl::RoundMetrics row(std::uint32_t r, double acc, double excl, double incl) {
  fl::RoundMetrics m;
  m.round = r;
  m.test_acc = acc;
  m.cum_frac_excl = excl;
  m.cum_frac_incl = incl;
  return m;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SPIKEFL_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesSectionsAndDefaults) {
  const auto cfg = parse_config_text(kTiny);
  EXPECT_EQ(cfg.label, "tiny");
  EXPECT_EQ(cfg.fl.seed, 5u);
  EXPECT_EQ(cfg.fl.model.widths, (std::vector<std::size_t>{8, 12, 3}));
  EXPECT_EQ(cfg.fl.model.lif.timesteps, 4);
  EXPECT_EQ(cfg.fl.compression.kappa, 0.5);
  EXPECT_EQ(cfg.data.source, DataSource::Synthetic);
  // untouched defaults
  EXPECT_EQ(cfg.fl.optimizer.learning_rate, 0.01);
  EXPECT_EQ(cfg.fl.optimizer.momentum, 0.95);
  EXPECT_EQ(cfg.fl.local_epochs, 1);
}

TEST(Config, ErrorsNameLineAndKey) {
  auto message = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("seed = 1\nfl.bogus = 3\n").find("line 2: unknown key \"fl.bogus\""),
            std::string::npos);
  EXPECT_NE(message("seed = 1\n\nseed = 2\n").find("already set on line 1"),
            std::string::npos);
  EXPECT_NE(message("[fl]\nrounds = many\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("compression.mode = sometimes\n").find("compression.mode"),
            std::string::npos);
  EXPECT_NE(message("just words\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("[fl\n").find("unterminated"), std::string::npos);
  EXPECT_NE(message("compression.mode = linear\ncompression.omega = 0.5\n"
                    "compression.alpha = 0.1\n")
                .find("omega"),
            std::string::npos);
}

TEST(Config, ReducingScheduleSpansTheRun) {
  const auto cfg = parse_config_text(
      "fl.rounds = 7\ncompression.mode = exponential\ncompression.alpha = 0.06\n"
      "compression.omega = 0.01\ndata.source = synthetic\n");
  EXPECT_EQ(cfg.fl.compression.rounds, 7);
}

TEST(Config, HashIgnoresLayoutAndTracksValues) {
  const auto a = parse_config_text(kTiny);
  const auto b = parse_config_text(std::string("# comment\n") + kTiny + "\n\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  auto c = a;
  set_config_value(c, "compression.kappa", "0.25");
  EXPECT_NE(config_hash(a), config_hash(c));
  // every key round-trips through its textual form
  for (const auto& k : config_keys()) {
    auto d = a;
    set_config_value(d, k.name, k.get(a));
    EXPECT_EQ(k.get(d), k.get(a)) << k.name;
  }
}

TEST(Metrics, RoundTrip) {
  std::vector<fl::RoundMetrics> rows;
  for (std::uint32_t r = 1; r <= 3; ++r) {
    fl::RoundMetrics m;
    m.round = r;
    m.kappa = 0.06 - 0.0005 * r;
    m.train_loss = 1.0 / 3.0 * r;
    m.test_loss = 2.5;
    m.test_acc = 0.1 * r;
    m.bytes_up = 1000 * r;
    m.bytes_down = 17;
    m.cum_frac_incl = 0.5;
    m.cum_frac_excl = 0.0625;
    m.client_drift = 1e-7;
    rows.push_back(m);
  }
  std::stringstream s;
  write_metrics(s, rows);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), kMetricsHeader);
  const auto back = parse_metrics(s, "mem");
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (const auto& col : metrics_columns())
      EXPECT_NEAR(metric_field(back[i], col), metric_field(rows[i], col),
                  1e-11 * std::abs(metric_field(rows[i], col)))
          << col;
}

TEST(Metrics, RejectsMalformedInput) {
  auto bad = [](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(parse_metrics(in, "mem"), FormatError) << text;
  };
  const std::string h = std::string(kMetricsHeader) + "\n";
  bad("");
  bad("round,kappa\n1,0.5\n");
  bad(h + "1,0.5,1,1,0.5,10,10,0.1\n");
  bad(h + "1,0.5,1,1,abc,10,10,0.1,0.1,0\n");
  bad(h + "1,0.5,1,1,1.5,10,10,0.1,0.1,0\n");
  EXPECT_THROW(read_metrics("/nonexistent/metrics.csv"), FormatError);
  EXPECT_THROW(metric_field(fl::RoundMetrics{}, "accuracy"), InputError);
}

TEST(Report, MatchesHandBuiltTable) {
  // Run A reaches 25% at round 2 and 50% at round 3; run B never reaches 50%.
  const std::vector<RunSeries> runs{
      {"A", {row(1, 0.10, 0.01, 0.2), row(2, 0.30, 0.02, 0.21), row(3, 0.55, 0.03, 0.22)}},
      {"B", {row(1, 0.26, 0.05, 0.3), row(2, 0.40, 0.10, 0.35), row(3, 0.35, 0.15, 0.4)}}};
  const std::vector<double> th{0.25, 0.50};
  const auto rep = build_report(runs, th);
  EXPECT_EQ(rep.cells[0][0], 0.02);
  EXPECT_EQ(rep.cells[0][1], 0.05);
  EXPECT_EQ(rep.cells[1][0], 0.03);
  EXPECT_FALSE(rep.cells[1][1].has_value());
  EXPECT_EQ(rep.highest_accuracy, (std::vector<double>{0.55, 0.40}));
  EXPECT_EQ(build_report(runs, th, FractionKind::Inclusive).cells[0][0], 0.21);

  const auto text = render_text(rep);
  EXPECT_EQ(text,
            "Bandwidth for accuracy  A       B\n"
            "25%                     0.0200  0.0500\n"
            "50%                     0.0300  --\n"
            "Highest Accuracy        55.00%  40.00%\n");
  EXPECT_EQ(render_csv(rep),
            "metric,A,B\n"
            "acc>=25%,0.020000,0.050000\n"
            "acc>=50%,0.030000,\n"
            "highest_accuracy,0.550000,0.400000\n");
}

TEST(Report, ZeroThresholdIsFirstRound) {
  const std::vector<RunSeries> runs{{"x", {row(1, 0.0, 0.125, 0.5), row(2, 0.9, 0.2, 0.6)}}};
  const auto rep = build_report(runs, {0.0});
  EXPECT_EQ(rep.cells[0][0], 0.125);
  EXPECT_EQ(render_text(rep).find(kUnreached), std::string::npos);
  EXPECT_THROW(build_report({{"empty", {}}}), FormatError);
}

TEST(Plot, OnePolylinePerRun) {
  const std::vector<RunSeries> one{{"a&b", {row(1, 0.1, 0, 0), row(2, 0.5, 0, 0)}}};
  const auto svg = render_svg(one, "test_acc");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("data-label=\"a&amp;b\""), std::string::npos);
  EXPECT_NE(svg.find("data-values=\"1:0.1 2:0.5\""), std::string::npos);
  auto two = one;
  two.push_back({"c", {row(1, 0.2, 0, 0)}});
  const auto svg2 = render_svg(two, "test_acc");
  std::size_t count = 0;
  for (auto at = svg2.find("class=\"series\""); at != std::string::npos;
       at = svg2.find("class=\"series\"", at + 1))
    ++count;
  EXPECT_EQ(count, 2u);
  EXPECT_THROW(render_svg(one, "bogus"), InputError);
  EXPECT_THROW(render_svg(one, "round"), InputError);

  const auto dir = scratch("plot");
  EXPECT_THROW(write_svg(dir / "p.svg", {{"e", {}}}, "test_acc"), Error);
  EXPECT_FALSE(fs::exists(dir / "p.svg"));
}

TEST(Runner, TrainWritesArtifactsReproducibly) {
  const auto cfg = parse_config_text(kTiny);
  const auto dir = scratch("train");
  const auto a = run_experiment(cfg, dir / "a");
  const auto b = run_experiment(cfg, dir / "b");
  ASSERT_EQ(a.exit_code, 0) << a.error;
  EXPECT_EQ(read_metrics(dir / "a" / "metrics.csv").size(), 2u);
  EXPECT_EQ(slurp(dir / "a" / "metrics.csv"), slurp(dir / "b" / "metrics.csv"));
  EXPECT_EQ(slurp(dir / "a" / "model.bin"), slurp(dir / "b" / "model.bin"));
  EXPECT_EQ(load_model(dir / "a" / "model.bin").size(), 8u * 12 + 12 * 3);
  const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  EXPECT_EQ(manifest["status"], "completed");
  EXPECT_EQ(manifest["config_hash"], config_hash(cfg));
  EXPECT_EQ(load_run(dir / "a").label, "tiny");
}

TEST(Runner, DivergenceIsReported) {
  auto cfg = parse_config_text(kTiny);
  set_config_value(cfg, "optim.lr", "1e300");
  set_config_value(cfg, "model.kind", "ann");
  const auto dir = scratch("diverge");
  const auto out = run_experiment(cfg, dir);
  EXPECT_EQ(out.exit_code, 1);
  EXPECT_EQ(out.status, "diverged");
  EXPECT_NE(out.error.find("round"), std::string::npos) << out.error;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "manifest.json"))["status"], "diverged");
}

TEST(Runner, LinearScheduleColumn) {
  auto cfg = parse_config_text(std::string(kTiny) +
                               "\n[compression]\n" /* overrides need a fresh config */);
  cfg = parse_config_text(
      std::string(kTiny).replace(std::string(kTiny).find("mode = fixed"), 12,
                                 "mode = linear\nalpha = 0.06\nomega = 0.01"));
  set_config_value(cfg, "fl.rounds", "5");
  cfg.fl.compression.rounds = 5;
  const auto out = run_experiment(cfg, scratch("linear"));
  ASSERT_EQ(out.metrics.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k)
    EXPECT_NEAR(out.metrics[k].kappa, 0.06 - static_cast<double>(k) * 0.05 / 5, 1e-12);
}

TEST(Sweep, OneRunPerValue) {
  const auto cfg = parse_config_text(kTiny);
  const auto root = scratch("sweep");
  const auto entries = run_sweep(cfg, "compression.kappa", {"1.0", "0.5"}, root, 2);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_TRUE(fs::exists(root / "compression.kappa=1.0" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(root / "compression.kappa=0.5" / "metrics.csv"));
  std::ifstream summary(root / "summary.csv");
  std::vector<std::string> lines;
  for (std::string l; std::getline(summary, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1].rfind("1.0,completed,2,", 0), 0u);
  // less of the model per round, smaller cumulative fraction
  EXPECT_LT(entries[1].outcome.metrics.back().cum_frac_excl,
            entries[0].outcome.metrics.back().cum_frac_excl);
  // the 0.5 sweep member matches a standalone run bit for bit
  EXPECT_EQ(slurp(root / "compression.kappa=0.5" / "metrics.csv"),
            [&] {
              const auto d = scratch("sweep_ref");
              run_experiment(cfg, d);
              return slurp(d / "metrics.csv");
            }());
}

TEST(Sweep, ZeroNoiseEqualsNoiselessRun) {
  const auto cfg = parse_config_text(std::string(kTiny) + "[channel]\nmode = relative\n");
  const auto root = scratch("sweep_noise");
  run_sweep(cfg, "channel.strength", {"0.0"}, root, 1);
  const auto plain = scratch("sweep_plain");
  run_experiment(parse_config_text(kTiny), plain);
  EXPECT_EQ(slurp(root / "channel.strength=0.0" / "metrics.csv"),
            slurp(plain / "metrics.csv"));
}

TEST(Sweep, RejectsBadAxis) {
  const auto cfg = parse_config_text(kTiny);
  const auto root = scratch("sweep_bad");
  EXPECT_THROW(run_sweep(cfg, "model.kind", {"ann"}, root, 1), ConfigError);
  EXPECT_THROW(run_sweep(cfg, "nope", {"1"}, root, 1), ConfigError);
  EXPECT_THROW(run_sweep(cfg, "compression.kappa", {"1.5"}, root, 1), ConfigError);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  {
    std::ofstream(dir / "tiny.conf") << kTiny;
    std::ofstream(dir / "broken.conf") << "fl.rounds = -3\n";
  }
  const std::string conf = (dir / "tiny.conf").string();
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("train --config " + (dir / "broken.conf").string()), 2);
  EXPECT_EQ(run_cli("train --config " + (dir / "missing.conf").string()), 2);
  EXPECT_EQ(run_cli("train --config " + conf + " --out " + (dir / "run").string() +
                    " --seed 9 --jobs 2"),
            0);
  EXPECT_EQ(run_cli("report " + (dir / "run").string() + " --out " +
                    (dir / "table.csv").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "table.csv"));
  EXPECT_EQ(run_cli("report " + (dir / "nothing").string()), 1);
  EXPECT_EQ(run_cli("plot " + (dir / "run").string() + " --out " +
                    (dir / "p.svg").string()),
            0);
  EXPECT_EQ(run_cli("plot " + (dir / "run").string() + " --field nope --out " +
                    (dir / "q.svg").string()),
            1);
  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 9);
  // default output root from the environment
  const std::string env = "SPIKEFL_OUT_ROOT=" + (dir / "root").string() + " ";
  const std::string cmd = env + SPIKEFL_CLI + " train --config " + conf + " >/dev/null 2>&1";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "root" / "tiny" / "metrics.csv"));
}
