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

#ifndef SPIKEFL_APP_METRICS_HPP
#define SPIKEFL_APP_METRICS_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "spikefl/errors.hpp"
#include "spikefl/fl/engine.hpp"

namespace spikefl::app {

inline constexpr const char* kMetricsHeader =
    "round,kappa_used,train_loss,test_loss,test_acc,bytes_up,bytes_down,"
    "cum_frac_incl,cum_frac_excl,client_drift";

inline const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {
      "round",     "kappa_used", "train_loss",    "test_loss",     "test_acc",
      "bytes_up",  "bytes_down", "cum_frac_incl", "cum_frac_excl", "client_drift"};
  return cols;
}

/// Column value by name; throws InputError for names not in the schema.
inline double metric_field(const fl::RoundMetrics& m, const std::string& name) {
  if (name == "round") return m.round;
  if (name == "kappa_used") return m.kappa;
  if (name == "train_loss") return m.train_loss;
  if (name == "test_loss") return m.test_loss;
  if (name == "test_acc") return m.test_acc;
  if (name == "bytes_up") return static_cast<double>(m.bytes_up);
  if (name == "bytes_down") return static_cast<double>(m.bytes_down);
  if (name == "cum_frac_incl") return m.cum_frac_incl;
  if (name == "cum_frac_excl") return m.cum_frac_excl;
  if (name == "client_drift") return m.client_drift;
  throw InputError("unknown metrics field \"" + name + "\"");
}

inline std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string metrics_row(const fl::RoundMetrics& m) {
  std::string row = std::to_string(m.round);
  for (double v : {m.kappa, m.train_loss, m.test_loss, m.test_acc})
    row += "," + format_metric(v);
  row += "," + std::to_string(m.bytes_up) + "," + std::to_string(m.bytes_down);
  for (double v : {m.cum_frac_incl, m.cum_frac_excl, m.client_drift})
    row += "," + format_metric(v);
  return row;
}

/// Appends rows as rounds finish, so an aborted run keeps its history.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw InputError("cannot write " + path.string());
    out_ << kMetricsHeader << '\n';
    out_.flush();
  }
  void write(const fl::RoundMetrics& m) {
    out_ << metrics_row(m) << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

inline void write_metrics(std::ostream& out,
                          const std::vector<fl::RoundMetrics>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& m : rows) out << metrics_row(m) << '\n';
}

inline std::vector<fl::RoundMetrics> parse_metrics(std::istream& in,
                                                   const std::string& source) {
  std::string line;
  if (!std::getline(in, line))
    throw FormatError(source + ": empty file, expected a header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader)
    throw FormatError(source + ": unexpected header \"" + line + "\"");
  std::vector<fl::RoundMetrics> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != metrics_columns().size())
      throw FormatError(where + "expected " +
                        std::to_string(metrics_columns().size()) +
                        " fields, found " + std::to_string(f.size()));
    auto num = [&](std::size_t i) {
      try {
        std::size_t used = 0;
        double v = std::stod(f[i], &used);
        if (used != f[i].size()) throw std::invalid_argument(f[i]);
        return v;
      } catch (const std::exception&) {
        throw FormatError(where + metrics_columns()[i] + " is not a number: \"" +
                          f[i] + "\"");
      }
    };
    fl::RoundMetrics m;
    m.round = static_cast<std::uint32_t>(num(0));
    m.kappa = num(1);
    m.train_loss = num(2);
    m.test_loss = num(3);
    m.test_acc = num(4);
    m.bytes_up = static_cast<std::uint64_t>(num(5));
    m.bytes_down = static_cast<std::uint64_t>(num(6));
    m.cum_frac_incl = num(7);
    m.cum_frac_excl = num(8);
    m.client_drift = num(9);
    if (!(m.test_acc >= 0.0 && m.test_acc <= 1.0))
      throw FormatError(where + "test_acc outside [0, 1]");
    rows.push_back(m);
  }
  return rows;
}

inline std::vector<fl::RoundMetrics> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("missing metrics file " + path.string());
  return parse_metrics(in, path.string());
}

}  // namespace spikefl::app

#endif  // SPIKEFL_APP_METRICS_HPP
