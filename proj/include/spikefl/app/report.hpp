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

#ifndef SPIKEFL_APP_REPORT_HPP
#define SPIKEFL_APP_REPORT_HPP

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "spikefl/errors.hpp"
#include "spikefl/fl/engine.hpp"

namespace spikefl::app {

struct RunSeries {
  std::string label;
  std::vector<fl::RoundMetrics> metrics;
};

enum class FractionKind { Exclusive, Inclusive };

inline const std::vector<double>& default_thresholds() {
  static const std::vector<double> t = {0.25, 0.40, 0.50, 0.60, 0.70, 0.75};
  return t;
}

/// Marker printed for thresholds a run never reaches.
inline constexpr const char* kUnreached = "--";

struct BandwidthReport {
  std::vector<std::string> labels;
  std::vector<double> thresholds;
  /// cells[t][run]: cumulative fraction at the first round with
  /// test_acc >= thresholds[t]; empty when never reached.
  std::vector<std::vector<std::optional<double>>> cells;
  std::vector<double> highest_accuracy;
};

inline BandwidthReport build_report(const std::vector<RunSeries>& runs,
                                    const std::vector<double>& thresholds =
                                        default_thresholds(),
                                    FractionKind kind = FractionKind::Exclusive) {
  BandwidthReport rep;
  rep.thresholds = thresholds;
  rep.cells.assign(thresholds.size(), {});
  for (const auto& run : runs) {
    if (run.metrics.empty())
      throw FormatError("run \"" + run.label + "\" has no metrics rows");
    rep.labels.push_back(run.label);
    double best = 0.0;
    for (const auto& m : run.metrics) best = std::max(best, m.test_acc);
    rep.highest_accuracy.push_back(best);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      std::optional<double> cell;
      for (const auto& m : run.metrics) {
        if (m.test_acc >= thresholds[t]) {
          cell = kind == FractionKind::Exclusive ? m.cum_frac_excl : m.cum_frac_incl;
          break;
        }
      }
      rep.cells[t].push_back(cell);
    }
  }
  return rep;
}

namespace detail {

inline std::string percent(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%g%%", v * 100.0);
  return buf;
}

inline std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

inline std::string render_text(const BandwidthReport& rep) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head{"Bandwidth for accuracy"};
  head.insert(head.end(), rep.labels.begin(), rep.labels.end());
  grid.push_back(head);
  for (std::size_t t = 0; t < rep.thresholds.size(); ++t) {
    std::vector<std::string> row{detail::percent(rep.thresholds[t])};
    for (const auto& c : rep.cells[t])
      row.push_back(c ? detail::fixed(*c, 4) : kUnreached);
    grid.push_back(row);
  }
  std::vector<std::string> best{"Highest Accuracy"};
  for (double a : rep.highest_accuracy) best.push_back(detail::fixed(a * 100.0, 2) + "%");
  grid.push_back(best);

  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : grid)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::string out;
  for (const auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::string cell = row[i];
      cell.resize(width[i], ' ');
      out += (i ? "  " : "") + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

/// One row per threshold plus highest_accuracy; unreached cells are empty.
inline std::string render_csv(const BandwidthReport& rep) {
  std::string out = "metric";
  for (const auto& l : rep.labels) out += "," + l;
  out += '\n';
  for (std::size_t t = 0; t < rep.thresholds.size(); ++t) {
    out += "acc>=" + detail::percent(rep.thresholds[t]);
    for (const auto& c : rep.cells[t]) out += "," + (c ? detail::fixed(*c, 6) : std::string());
    out += '\n';
  }
  out += "highest_accuracy";
  for (double a : rep.highest_accuracy) out += "," + detail::fixed(a, 6);
  out += '\n';
  return out;
}

}  // namespace spikefl::app

#endif  // SPIKEFL_APP_REPORT_HPP
