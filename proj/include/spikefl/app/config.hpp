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

#ifndef SPIKEFL_APP_CONFIG_HPP
#define SPIKEFL_APP_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spikefl/errors.hpp"
#include "spikefl/fl/engine.hpp"

namespace spikefl::app {

// Experiment files are flat `key = value` lines:
//
//   # comment
//   seed = 7
//   [fl]                 # optional section header, prefixes following keys
//   rounds = 20          # same as fl.rounds = 20
//
// Keys are the dotted names listed in docs/config.md. Unknown or repeated keys
// are rejected with the line number; lists are comma separated.

enum class DataSource { Mnist, Cifar10, Synthetic };

struct DataConfig {
  DataSource source = DataSource::Mnist;
  std::string train_images = "data/mnist/train-images-idx3-ubyte";
  std::string train_labels = "data/mnist/train-labels-idx1-ubyte";
  std::string test_images = "data/mnist/t10k-images-idx3-ubyte";
  std::string test_labels = "data/mnist/t10k-labels-idx1-ubyte";
  std::vector<std::string> cifar_train;
  std::vector<std::string> cifar_test;
  std::size_t train_limit = 0;  // 0 keeps every sample
  std::size_t test_limit = 0;
  int synthetic_classes = 10;
  std::size_t synthetic_features = 64;
  std::size_t synthetic_train = 1000;
  std::size_t synthetic_test = 500;
  double synthetic_separation = 0.5;
};

struct ExperimentConfig {
  fl::FlConfig fl;
  DataConfig data;
  std::string label;
  std::string output_dir;
  /// Directory that relative data paths resolve against.
  std::filesystem::path base_dir = ".";

  ExperimentConfig() {
    fl.model.lif.timesteps = 25;
    fl.optimizer = {0.01, 0.95, 0.0};
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a number, got \"" + v + "\"");
  return out;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got \"" + v +
                      "\"");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got \"" + v + "\"");
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

template <typename Enum>
Enum parse_enum(const std::string& key, const std::string& v,
                std::initializer_list<std::pair<const char*, Enum>> names) {
  std::string allowed;
  for (const auto& [name, value] : names) {
    if (v == name) return value;
    allowed += std::string(allowed.empty() ? "" : "|") + name;
  }
  throw ConfigError(key + ": expected one of " + allowed + ", got \"" + v +
                    "\"");
}

}  // namespace detail

struct ConfigKey {
  std::string name;
  bool numeric;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

inline const std::vector<ConfigKey>& config_keys() {
  using namespace detail;
  using compression::ScheduleMode;
  using channel::NoiseMode;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    auto num = [&k](std::string name, auto member_ref) {
      k.push_back({name, true,
                   [name, member_ref](ExperimentConfig& c, const std::string& v) {
                     auto& field = member_ref(c);
                     using T = std::remove_reference_t<decltype(field)>;
                     if constexpr (std::is_floating_point_v<T>)
                       field = parse_double(name, v);
                     else
                       field = static_cast<T>(parse_uint(name, v));
                   },
                   [member_ref](const ExperimentConfig& c) {
                     auto& field = member_ref(const_cast<ExperimentConfig&>(c));
                     using T = std::remove_reference_t<decltype(field)>;
                     if constexpr (std::is_floating_point_v<T>)
                       return format_double(field);
                     else
                       return std::to_string(field);
                   }});
    };
    auto str = [&k](std::string name, auto set, auto get) {
      k.push_back({std::move(name), false, set, get});
    };

    num("seed", [](ExperimentConfig& c) -> auto& { return c.fl.seed; });
    str("label", [](ExperimentConfig& c, const std::string& v) { c.label = v; },
        [](const ExperimentConfig& c) { return c.label; });
    str("output.dir",
        [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
        [](const ExperimentConfig& c) { return c.output_dir; });

    str("model.kind",
        [](ExperimentConfig& c, const std::string& v) {
          c.fl.model.kind = parse_enum<snn::ModelKind>(
              "model.kind", v, {{"snn", snn::ModelKind::Snn},
                                {"ann", snn::ModelKind::Ann}});
        },
        [](const ExperimentConfig& c) {
          return std::string(snn::to_string(c.fl.model.kind));
        });
    str("model.layers",
        [](ExperimentConfig& c, const std::string& v) {
          c.fl.model.widths.clear();
          for (const auto& w : split_list(v))
            c.fl.model.widths.push_back(parse_uint("model.layers", w));
        },
        [](const ExperimentConfig& c) {
          std::vector<std::string> w;
          for (auto x : c.fl.model.widths) w.push_back(std::to_string(x));
          return join(w);
        });
    num("model.beta", [](ExperimentConfig& c) -> auto& { return c.fl.model.lif.beta; });
    num("model.threshold",
        [](ExperimentConfig& c) -> auto& { return c.fl.model.lif.threshold; });
    num("model.xi", [](ExperimentConfig& c) -> auto& { return c.fl.model.lif.xi; });
    num("model.timesteps",
        [](ExperimentConfig& c) -> auto& { return c.fl.model.lif.timesteps; });

    num("optim.lr",
        [](ExperimentConfig& c) -> auto& { return c.fl.optimizer.learning_rate; });
    num("optim.momentum",
        [](ExperimentConfig& c) -> auto& { return c.fl.optimizer.momentum; });
    num("optim.weight_decay",
        [](ExperimentConfig& c) -> auto& { return c.fl.optimizer.weight_decay; });

    num("fl.clients", [](ExperimentConfig& c) -> auto& { return c.fl.num_clients; });
    num("fl.rounds", [](ExperimentConfig& c) -> auto& { return c.fl.rounds; });
    num("fl.local_epochs",
        [](ExperimentConfig& c) -> auto& { return c.fl.local_epochs; });
    num("fl.batch_size", [](ExperimentConfig& c) -> auto& { return c.fl.batch_size; });
    num("fl.workers", [](ExperimentConfig& c) -> auto& { return c.fl.workers; });
    num("fl.eval_batch", [](ExperimentConfig& c) -> auto& { return c.fl.eval_batch; });
    str("fl.dense_first_broadcast",
        [](ExperimentConfig& c, const std::string& v) {
          c.fl.dense_first_broadcast = parse_bool("fl.dense_first_broadcast", v);
        },
        [](const ExperimentConfig& c) {
          return std::string(c.fl.dense_first_broadcast ? "true" : "false");
        });

    str("compression.mode",
        [](ExperimentConfig& c, const std::string& v) {
          c.fl.compression.mode = parse_enum<ScheduleMode>(
              "compression.mode", v,
              {{"none", ScheduleMode::None},
               {"fixed", ScheduleMode::Fixed},
               {"linear", ScheduleMode::LinearReduce},
               {"exponential", ScheduleMode::ExpReduce}});
        },
        [](const ExperimentConfig& c) {
          return std::string(compression::to_string(c.fl.compression.mode));
        });
    num("compression.kappa",
        [](ExperimentConfig& c) -> auto& { return c.fl.compression.kappa; });
    num("compression.alpha",
        [](ExperimentConfig& c) -> auto& { return c.fl.compression.alpha; });
    num("compression.omega",
        [](ExperimentConfig& c) -> auto& { return c.fl.compression.omega; });
    str("compression.rounding",
        [](ExperimentConfig& c, const std::string& v) {
          c.fl.rounding = parse_enum<compression::Rounding>(
              "compression.rounding", v,
              {{"floor", compression::Rounding::Floor},
               {"ceil", compression::Rounding::Ceil}});
        },
        [](const ExperimentConfig& c) {
          return std::string(c.fl.rounding == compression::Rounding::Floor
                                 ? "floor"
                                 : "ceil");
        });

    str("channel.mode",
        [](ExperimentConfig& c, const std::string& v) {
          c.fl.channel.mode = parse_enum<NoiseMode>(
              "channel.mode", v,
              {{"none", NoiseMode::Noiseless},
               {"absolute", NoiseMode::Absolute},
               {"relative", NoiseMode::Relative}});
        },
        [](const ExperimentConfig& c) {
          return std::string(channel::to_string(c.fl.channel.mode));
        });
    num("channel.strength",
        [](ExperimentConfig& c) -> auto& { return c.fl.channel.strength; });

    str("data.source",
        [](ExperimentConfig& c, const std::string& v) {
          c.data.source = parse_enum<DataSource>(
              "data.source", v,
              {{"mnist", DataSource::Mnist},
               {"cifar10", DataSource::Cifar10},
               {"synthetic", DataSource::Synthetic}});
        },
        [](const ExperimentConfig& c) {
          switch (c.data.source) {
            case DataSource::Mnist: return std::string("mnist");
            case DataSource::Cifar10: return std::string("cifar10");
            default: return std::string("synthetic");
          }
        });
    auto path_key = [&str](std::string name, std::string DataConfig::*field) {
      str(std::move(name),
          [field](ExperimentConfig& c, const std::string& v) { c.data.*field = v; },
          [field](const ExperimentConfig& c) { return c.data.*field; });
    };
    path_key("data.train_images", &DataConfig::train_images);
    path_key("data.train_labels", &DataConfig::train_labels);
    path_key("data.test_images", &DataConfig::test_images);
    path_key("data.test_labels", &DataConfig::test_labels);
    auto list_key = [&str](std::string name,
                           std::vector<std::string> DataConfig::*field) {
      str(std::move(name),
          [field](ExperimentConfig& c, const std::string& v) {
            c.data.*field = split_list(v);
          },
          [field](const ExperimentConfig& c) { return join(c.data.*field); });
    };
    list_key("data.cifar_train", &DataConfig::cifar_train);
    list_key("data.cifar_test", &DataConfig::cifar_test);
    num("data.train_limit", [](ExperimentConfig& c) -> auto& { return c.data.train_limit; });
    num("data.test_limit", [](ExperimentConfig& c) -> auto& { return c.data.test_limit; });
    num("data.synthetic.classes",
        [](ExperimentConfig& c) -> auto& { return c.data.synthetic_classes; });
    num("data.synthetic.features",
        [](ExperimentConfig& c) -> auto& { return c.data.synthetic_features; });
    num("data.synthetic.train",
        [](ExperimentConfig& c) -> auto& { return c.data.synthetic_train; });
    num("data.synthetic.test",
        [](ExperimentConfig& c) -> auto& { return c.data.synthetic_test; });
    num("data.synthetic.separation",
        [](ExperimentConfig& c) -> auto& { return c.data.synthetic_separation; });
    return k;
  }();
  return keys;
}

inline const ConfigKey* find_key(const std::string& name) {
  for (const auto& k : config_keys())
    if (k.name == name) return &k;
  return nullptr;
}

/// Sets one key; used by the parser and by sweeps.
inline void set_config_value(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
  const ConfigKey* k = find_key(key);
  if (!k) throw ConfigError("unknown key \"" + key + "\"");
  k->set(cfg, value);
}

/// Cross-field checks on top of FlConfig::validate().
inline void validate(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  try {
    cfg.fl.validate();
  } catch (const ConfigError& e) {
    problems.emplace_back(e.what());
  }
  if (cfg.fl.compression.reduces() && cfg.fl.compression.rounds != cfg.fl.rounds)
    problems.emplace_back("compression schedule length must equal fl.rounds");
  if (cfg.data.source == DataSource::Cifar10 &&
      (cfg.data.cifar_train.empty() || cfg.data.cifar_test.empty()))
    problems.emplace_back("data.cifar_train and data.cifar_test are required "
                          "for data.source = cifar10");
  if (cfg.data.source == DataSource::Synthetic) {
    if (cfg.data.synthetic_classes < 1)
      problems.emplace_back("data.synthetic.classes must be >= 1");
    if (cfg.data.synthetic_train < static_cast<std::size_t>(cfg.data.synthetic_classes))
      problems.emplace_back("data.synthetic.train must be >= classes");
  }
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "\n") + p;
    throw ConfigError(msg);
  }
}

inline ExperimentConfig parse_config(std::istream& in,
                                     const std::filesystem::path& base_dir = ".") {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  std::map<std::string, int> seen;
  std::string section;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + "expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    if (auto it = seen.find(key); it != seen.end())
      throw ConfigError(where + "key \"" + key + "\" already set on line " +
                        std::to_string(it->second));
    seen[key] = line_no;
    if (!find_key(key)) throw ConfigError(where + "unknown key \"" + key + "\"");
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  // Reducing schedules always span the whole run.
  cfg.fl.compression.rounds = cfg.fl.rounds;
  validate(cfg);
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text,
                                          const std::filesystem::path& base_dir = ".") {
  std::istringstream in(text);
  return parse_config(in, base_dir);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  auto dir = path.parent_path();
  return parse_config(in, dir.empty() ? std::filesystem::path(".") : dir);
}

/// Every key with its effective value, sorted; stable input for hashing.
inline std::string canonical_text(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& k : config_keys()) rows.emplace_back(k.name, k.get(cfg));
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [k, v] : rows) out += k + " = " + v + "\n";
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical_text(cfg))));
  return buf;
}

}  // namespace spikefl::app

#endif  // SPIKEFL_APP_CONFIG_HPP
