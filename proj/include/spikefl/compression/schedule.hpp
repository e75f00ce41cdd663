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

#ifndef SPIKEFL_COMPRESSION_SCHEDULE_HPP
#define SPIKEFL_COMPRESSION_SCHEDULE_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spikefl/errors.hpp"

namespace spikefl::compression {

/// kappa - (alpha - omega) / R, never below omega.
inline double reduce_linear(double kappa, double alpha, double omega,
                            int rounds) {
  return std::max(omega, kappa - (alpha - omega) / rounds);
}

/// exp(ln kappa - (ln alpha - ln omega) / R), never below omega.
inline double reduce_exponential(double kappa, double alpha, double omega,
                                 int rounds) {
  if (!(kappa > 0.0))
    throw InputError("reduce_exponential: kappa must be > 0, got " +
                     std::to_string(kappa));
  if (!(alpha > 0.0 && omega > 0.0))
    throw InputError("reduce_exponential: alpha and omega must be > 0");
  return std::max(
      omega, std::exp(std::log(kappa) - (std::log(alpha) - std::log(omega)) /
                                            rounds));
}

enum class ScheduleMode { None, Fixed, LinearReduce, ExpReduce };

inline const char* to_string(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::None: return "none";
    case ScheduleMode::Fixed: return "fixed";
    case ScheduleMode::LinearReduce: return "linear";
    case ScheduleMode::ExpReduce: return "exponential";
  }
  return "?";
}

/// Per-round compression rate.
///
///   None          kappa = 1 every round (plain FedAvg)
///   Fixed         constant kappa
///   LinearReduce  alpha, then reduce_linear once per round, floor omega
///   ExpReduce     alpha, then reduce_exponential once per round, floor omega
struct CompressionSchedule {
  ScheduleMode mode = ScheduleMode::None;
  double kappa = 1.0;
  double alpha = 0.06;
  double omega = 0.01;
  int rounds = 100;

  bool reduces() const {
    return mode == ScheduleMode::LinearReduce || mode == ScheduleMode::ExpReduce;
  }

  void validate() const {
    if (mode == ScheduleMode::Fixed && !(kappa > 0.0 && kappa <= 1.0))
      throw InputError("compression.kappa must lie in (0, 1], got " +
                       std::to_string(kappa));
    if (reduces()) {
      if (!(omega > 0.0 && omega <= alpha && alpha <= 1.0))
        throw InputError("compression requires 0 < omega <= alpha <= 1, got "
                         "alpha=" + std::to_string(alpha) +
                         " omega=" + std::to_string(omega));
      if (rounds < 1)
        throw InputError("compression.rounds must be >= 1, got " +
                         std::to_string(rounds));
    }
  }

  double initial() const {
    switch (mode) {
      case ScheduleMode::None: return 1.0;
      case ScheduleMode::Fixed: return kappa;
      default: return alpha;
    }
  }

  double next(double current) const {
    switch (mode) {
      case ScheduleMode::LinearReduce:
        return reduce_linear(current, alpha, omega, rounds);
      case ScheduleMode::ExpReduce:
        return reduce_exponential(current, alpha, omega, rounds);
      default: return current;
    }
  }

  /// kappa used in rounds 1..n.
  std::vector<double> sequence(int n) const {
    std::vector<double> out;
    double k = initial();
    for (int r = 0; r < n; ++r) {
      out.push_back(k);
      k = next(k);
    }
    return out;
  }

  bool operator==(const CompressionSchedule&) const = default;
};

}  // namespace spikefl::compression

#endif  // SPIKEFL_COMPRESSION_SCHEDULE_HPP
