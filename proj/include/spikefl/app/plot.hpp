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

#ifndef SPIKEFL_APP_PLOT_HPP
#define SPIKEFL_APP_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spikefl/app/metrics.hpp"
#include "spikefl/app/report.hpp"
#include "spikefl/errors.hpp"

namespace spikefl::app {

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

/// Line chart of `field` against round, one polyline per run. The raw values
/// ride along in a data-values attribute on each polyline.
inline std::string render_svg(const std::vector<RunSeries>& runs,
                              const std::string& field) {
  metric_field(fl::RoundMetrics{}, field);  // rejects unknown names
  if (field == "round") throw InputError("\"round\" is the x axis");
  if (runs.empty()) throw InputError("plot: no runs given");
  for (const auto& r : runs)
    if (r.metrics.empty())
      throw InputError("plot: run \"" + r.label + "\" has no metrics rows");

  double x_max = 1, y_min = INFINITY, y_max = -INFINITY;
  for (const auto& r : runs)
    for (const auto& m : r.metrics) {
      x_max = std::max(x_max, static_cast<double>(m.round));
      const double v = metric_field(m, field);
      if (std::isfinite(v)) {
        y_min = std::min(y_min, v);
        y_max = std::max(y_max, v);
      }
    }
  if (!std::isfinite(y_min)) y_min = y_max = 0;
  if (y_max - y_min < 1e-12) {
    y_min -= 0.5;
    y_max += 0.5;
  }

  const double W = 720, H = 440, left = 70, right = 190, top = 30, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (x_max > 1 ? (x - 1) / (x_max - 1) : 0.5) * pw; };
  auto sy = [&](double y) { return top + (1 - (y - y_min) / (y_max - y_min)) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(W) +
       "\" height=\"" + detail::num(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<g class=\"axes\" stroke=\"black\">\n";
  s += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top + ph) + "\" x2=\"" +
       detail::num(left + pw) + "\" y2=\"" + detail::num(top + ph) + "\"/>\n";
  s += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top) + "\" x2=\"" +
       detail::num(left) + "\" y2=\"" + detail::num(top + ph) + "\"/>\n";
  s += "</g>\n<g class=\"ticks\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = y_min + (y_max - y_min) * k / 4.0;
    const double xv = 1 + (x_max - 1) * k / 4.0;
    s += "<text x=\"" + detail::num(left - 6) + "\" y=\"" + detail::num(sy(yv) + 4) +
         "\" text-anchor=\"end\">" + detail::num(yv) + "</text>\n";
    s += "<text x=\"" + detail::num(sx(xv)) + "\" y=\"" + detail::num(top + ph + 18) +
         "\" text-anchor=\"middle\">" + detail::num(std::round(xv)) + "</text>\n";
  }
  s += "</g>\n";
  s += "<text x=\"" + detail::num(left + pw / 2) + "\" y=\"" + detail::num(H - 10) +
       "\" text-anchor=\"middle\">round</text>\n";
  s += "<text x=\"16\" y=\"" + detail::num(top + ph / 2) + "\" transform=\"rotate(-90 16 " +
       detail::num(top + ph / 2) + ")\" text-anchor=\"middle\">" +
       detail::xml_escape(field) + "</text>\n";

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const char* color = colors[i % std::size(colors)];
    std::string points, values;
    for (const auto& m : runs[i].metrics) {
      const double v = metric_field(m, field);
      if (!points.empty()) {
        points += ' ';
        values += ' ';
      }
      points += detail::num(sx(m.round)) + "," + detail::num(sy(std::isfinite(v) ? v : y_max));
      values += std::to_string(m.round) + ":" + format_metric(v);
    }
    s += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"1.5\" data-label=\"" + detail::xml_escape(runs[i].label) +
         "\" data-values=\"" + values + "\" points=\"" + points + "\"/>\n";
  }

  s += "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const double y = top + 10 + 18.0 * static_cast<double>(i);
    const double x = left + pw + 15;
    s += "<line x1=\"" + detail::num(x) + "\" y1=\"" + detail::num(y) + "\" x2=\"" +
         detail::num(x + 20) + "\" y2=\"" + detail::num(y) + "\" stroke=\"" +
         colors[i % std::size(colors)] + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + detail::num(x + 26) + "\" y=\"" + detail::num(y + 4) + "\">" +
         detail::xml_escape(runs[i].label) + "</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

/// Renders first, so nothing is written when the input is rejected.
inline void write_svg(const std::filesystem::path& path,
                      const std::vector<RunSeries>& runs, const std::string& field) {
  const std::string svg = render_svg(runs, field);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << svg;
}

}  // namespace spikefl::app

#endif  // SPIKEFL_APP_PLOT_HPP
