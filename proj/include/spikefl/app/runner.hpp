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

#ifndef SPIKEFL_APP_RUNNER_HPP
#define SPIKEFL_APP_RUNNER_HPP

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "spikefl/app/config.hpp"
#include "spikefl/app/metrics.hpp"
#include "spikefl/app/report.hpp"
#include "spikefl/data/loaders.hpp"
#include "spikefl/fl/engine.hpp"

namespace spikefl::app {

namespace fs = std::filesystem;

struct Datasets {
  data::Dataset train;
  data::Dataset test;
};

inline fs::path resolve(const ExperimentConfig& cfg, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : cfg.base_dir / path;
}

inline Datasets load_datasets(const ExperimentConfig& cfg) {
  const auto& d = cfg.data;
  Datasets out;
  switch (d.source) {
    case DataSource::Mnist:
      out.train = data::load_mnist_idx(resolve(cfg, d.train_images),
                                       resolve(cfg, d.train_labels));
      out.test = data::load_mnist_idx(resolve(cfg, d.test_images),
                                      resolve(cfg, d.test_labels));
      break;
    case DataSource::Cifar10: {
      std::vector<fs::path> tr, te;
      for (const auto& p : d.cifar_train) tr.push_back(resolve(cfg, p));
      for (const auto& p : d.cifar_test) te.push_back(resolve(cfg, p));
      out.train = data::load_cifar10_binary(tr);
      out.test = data::load_cifar10_binary(te);
      break;
    }
    case DataSource::Synthetic: {
      Rng rng(derive_seed(cfg.fl.seed, Stream::Synthetic));
      const auto all = data::make_synthetic(
          d.synthetic_classes, d.synthetic_features,
          d.synthetic_train + d.synthetic_test, d.synthetic_separation, rng);
      std::vector<std::size_t> tr(d.synthetic_train), te(d.synthetic_test);
      for (std::size_t i = 0; i < tr.size(); ++i) tr[i] = i;
      for (std::size_t i = 0; i < te.size(); ++i) te[i] = tr.size() + i;
      out.train = {all.gather(tr), all.gather_labels(tr), all.class_count};
      out.test = {all.gather(te), all.gather_labels(te), all.class_count};
      break;
    }
  }
  out.train = out.train.head(d.train_limit);
  out.test = out.test.head(d.test_limit);
  return out;
}

// Model file: "SPKM", u32 layer count, then per layer u32 rows, u32 cols and
// rows*cols little-endian f64 values.
inline void save_model(const fs::path& path, const fl::ParamVector& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  auto put32 = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>(v >> (8 * i)));
  };
  out.write("SPKM", 4);
  put32(static_cast<std::uint32_t>(params.layout.size()));
  std::size_t at = 0;
  for (const auto& l : params.layout) {
    put32(static_cast<std::uint32_t>(l.shape.at(0)));
    put32(static_cast<std::uint32_t>(l.shape.at(1)));
    for (std::size_t k = 0; k < element_count(l.shape); ++k, ++at) {
      const auto bits = std::bit_cast<std::uint64_t>(params.values[at]);
      for (int i = 0; i < 8; ++i) out.put(static_cast<char>(bits >> (8 * i)));
    }
  }
}

inline fl::ParamVector load_model(const fs::path& path) {
  const auto bytes = data::read_file(path);
  std::size_t at = 0;
  auto need = [&](std::size_t n) {
    if (at + n > bytes.size())
      throw FormatError(path.string() + ": truncated at byte " + std::to_string(at));
  };
  auto get = [&](int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{bytes[at++]} << (8 * i);
    return v;
  };
  need(4);
  if (std::string(bytes.begin(), bytes.begin() + 4) != "SPKM")
    throw FormatError(path.string() + ": bad model magic");
  at = 4;
  fl::ParamVector pv;
  const auto layers = get(4);
  for (std::uint64_t l = 0; l < layers; ++l) {
    const std::size_t rows = get(4), cols = get(4);
    pv.layout.push_back({static_cast<std::size_t>(l), Shape{rows, cols}});
    for (std::size_t k = 0; k < rows * cols; ++k)
      pv.values.push_back(std::bit_cast<double>(get(8)));
  }
  if (at != bytes.size()) throw FormatError(path.string() + ": trailing bytes");
  return pv;
}

inline std::string default_label(const ExperimentConfig& cfg) {
  if (!cfg.label.empty()) return cfg.label;
  std::string l = snn::to_string(cfg.fl.model.kind);
  l += " " + std::string(compression::to_string(cfg.fl.compression.mode));
  if (cfg.fl.compression.mode == compression::ScheduleMode::Fixed)
    l += " k=" + format_metric(cfg.fl.compression.kappa);
  if (cfg.fl.channel.mode != channel::NoiseMode::Noiseless)
    l += " s=" + format_metric(cfg.fl.channel.strength);
  return l;
}

struct RunOutcome {
  /// 0 completed, 1 runtime or numeric abort.
  int exit_code = 0;
  std::string status;  // completed | diverged | failed
  std::string error;
  std::vector<fl::RoundMetrics> metrics;
};

inline void write_manifest(const fs::path& dir, const ExperimentConfig& cfg,
                           const RunOutcome& outcome, std::size_t dropped,
                           std::size_t params) {
  nlohmann::ordered_json m;
  m["label"] = default_label(cfg);
  m["seed"] = cfg.fl.seed;
  m["config_hash"] = config_hash(cfg);
  m["status"] = outcome.status;
  m["rounds_planned"] = cfg.fl.rounds;
  m["rounds_completed"] = outcome.metrics.size();
  m["error"] = outcome.error;
  m["parameters"] = params;
  m["dropped_samples"] = dropped;
  nlohmann::ordered_json c;
  for (const auto& k : config_keys()) c[k.name] = k.get(cfg);
  m["config"] = c;
  std::ofstream out(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

/// Trains one configuration into `out_dir` (metrics.csv, model.bin,
/// manifest.json). Divergence and data errors become a nonzero outcome.
inline RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir,
                                 std::ostream* log = nullptr) {
  fs::create_directories(out_dir);
  RunOutcome outcome;
  std::size_t dropped = 0, params = 0;
  try {
    const Datasets ds = load_datasets(cfg);
    MetricsWriter writer(out_dir / "metrics.csv");
    auto result = fl::run_training(cfg.fl, ds.train, ds.test, [&](const fl::RoundMetrics& m) {
      writer.write(m);
      outcome.metrics.push_back(m);
      if (log)
        *log << "round " << m.round << "/" << cfg.fl.rounds << "  kappa "
             << format_metric(m.kappa) << "  loss " << format_metric(m.train_loss)
             << "  acc " << format_metric(m.test_acc) << '\n';
    });
    dropped = result.dropped_samples;
    params = result.final_model.size();
    save_model(out_dir / "model.bin", result.final_model);
    outcome.status = "completed";
  } catch (const NumericError& e) {
    outcome = {1, "diverged", e.what(), std::move(outcome.metrics)};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    outcome = {1, "failed", e.what(), std::move(outcome.metrics)};
  }
  write_manifest(out_dir, cfg, outcome, dropped, params);
  return outcome;
}

/// Reads a finished run directory for report and plot.
inline RunSeries load_run(const fs::path& dir) {
  RunSeries run;
  run.metrics = read_metrics(dir / "metrics.csv");
  run.label = dir.filename().string();
  if (run.label.empty()) run.label = dir.parent_path().filename().string();
  std::ifstream in(dir / "manifest.json");
  if (in) {
    try {
      const auto m = nlohmann::json::parse(in);
      if (m.contains("label") && m["label"].is_string()) run.label = m["label"];
    } catch (const nlohmann::json::exception& e) {
      throw FormatError((dir / "manifest.json").string() + ": " + e.what());
    }
  }
  return run;
}

struct SweepEntry {
  std::string value;
  fs::path dir;
  RunOutcome outcome;
};

inline std::string sweep_dir_name(const std::string& axis, const std::string& value) {
  std::string name = axis + "=" + value;
  for (char& c : name)
    if (c == '/' || c == '\\' || c == ' ') c = '_';
  return name;
}

/// One run per value of `axis`, all sharing the master seed; up to `jobs`
/// runs at a time. Writes summary.csv under `out_root`.
inline std::vector<SweepEntry> run_sweep(const ExperimentConfig& base,
                                         const std::string& axis,
                                         const std::vector<std::string>& values,
                                         const fs::path& out_root, std::size_t jobs,
                                         std::ostream* log = nullptr) {
  const ConfigKey* key = find_key(axis);
  if (!key) throw ConfigError("sweep axis: unknown key \"" + axis + "\"");
  if (!key->numeric) throw ConfigError("sweep axis: \"" + axis + "\" is not numeric");
  if (values.empty()) throw ConfigError("sweep: no values given");

  std::vector<ExperimentConfig> cfgs;
  for (const auto& v : values) {
    ExperimentConfig c = base;
    try {
      set_config_value(c, axis, v);
      if (axis == "fl.rounds" && c.fl.compression.rounds == base.fl.rounds)
        c.fl.compression.rounds = c.fl.rounds;
      if (c.label.empty() || c.label == base.label)
        c.label = (base.label.empty() ? "" : base.label + " ") + axis + "=" + v;
      validate(c);
    } catch (const ConfigError& e) {
      throw ConfigError("sweep value " + v + ": " + e.what());
    }
    cfgs.push_back(std::move(c));
  }

  fs::create_directories(out_root);
  std::vector<SweepEntry> entries(values.size());
  std::mutex log_mutex;
  fl::parallel_for(values.size(), jobs, [&](std::size_t i) {
    entries[i].value = values[i];
    entries[i].dir = out_root / sweep_dir_name(axis, values[i]);
    entries[i].outcome = run_experiment(cfgs[i], entries[i].dir);
    if (log) {
      std::lock_guard lock(log_mutex);
      *log << axis << "=" << values[i] << ": " << entries[i].outcome.status << '\n';
    }
  });

  std::ofstream summary(out_root / "summary.csv");
  summary << "value,status,rounds,highest_acc,final_acc,cum_frac_incl,cum_frac_excl\n";
  for (const auto& e : entries) {
    const auto& m = e.outcome.metrics;
    double best = 0.0;
    for (const auto& r : m) best = std::max(best, r.test_acc);
    summary << e.value << "," << e.outcome.status << "," << m.size() << ","
            << format_metric(best) << ","
            << format_metric(m.empty() ? 0.0 : m.back().test_acc) << ","
            << format_metric(m.empty() ? 0.0 : m.back().cum_frac_incl) << ","
            << format_metric(m.empty() ? 0.0 : m.back().cum_frac_excl) << "\n";
  }
  return entries;
}

}  // namespace spikefl::app

#endif  // SPIKEFL_APP_RUNNER_HPP
