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

#ifndef SPIKEFL_CHANNEL_CHANNEL_HPP
#define SPIKEFL_CHANNEL_CHANNEL_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "spikefl/compression/sparse.hpp"
#include "spikefl/errors.hpp"
#include "spikefl/fl/param_vector.hpp"
#include "spikefl/random.hpp"

namespace spikefl::channel {

enum class NoiseMode { Noiseless, Absolute, Relative };

inline const char* to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::Noiseless: return "none";
    case NoiseMode::Absolute: return "absolute";
    case NoiseMode::Relative: return "relative";
  }
  return "?";
}

/// Absolute: every transfer gets N(0, strength).
/// Relative: sigma = strength * mean |value| over the values in the transfer.
struct ChannelConfig {
  NoiseMode mode = NoiseMode::Noiseless;
  double strength = 0.0;

  void validate() const {
    if (!(strength >= 0.0) || !std::isfinite(strength))
      throw InputError("channel.strength must be a finite value >= 0, got " +
                       std::to_string(strength));
  }

  bool operator==(const ChannelConfig&) const = default;
};

inline double effective_sigma(const ChannelConfig& cfg,
                              std::span<const double> values) {
  switch (cfg.mode) {
    case NoiseMode::Noiseless: return 0.0;
    case NoiseMode::Absolute: return cfg.strength;
    case NoiseMode::Relative: {
      if (values.empty())
        throw InputError("relative noise needs at least one transmitted value");
      double sum = 0.0;
      for (double v : values) sum += std::abs(v);
      return cfg.strength * (sum / static_cast<double>(values.size()));
    }
  }
  return 0.0;
}

/// Adds i.i.d. N(0, sigma) to every value. sigma == 0 leaves values untouched.
inline void perturb(std::span<double> values, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw InputError("perturb: sigma must be >= 0");
  if (sigma == 0.0) return;
  for (double& v : values) v += sigma * rng.normal();
}

inline std::vector<double> perturbed(std::span<const double> values,
                                     double sigma, Rng& rng) {
  std::vector<double> out(values.begin(), values.end());
  perturb(out, sigma, rng);
  return out;
}

/// Sends a payload across a noisy link. Only values change; indices and
/// header fields are preserved. Returns the sigma that was applied.
inline double transmit(compression::SparseUpdate& payload,
                       const ChannelConfig& cfg, Rng& rng) {
  if (cfg.mode == NoiseMode::Noiseless) return 0.0;
  std::vector<double> values;
  values.reserve(payload.size());
  for (const auto& e : payload.entries) values.push_back(e.value);
  const double sigma = effective_sigma(cfg, values);
  perturb(values, sigma, rng);
  for (std::size_t k = 0; k < values.size(); ++k)
    payload.entries[k].value = values[k];
  return sigma;
}

inline double transmit(fl::ParamVector& payload, const ChannelConfig& cfg,
                       Rng& rng) {
  if (cfg.mode == NoiseMode::Noiseless) return 0.0;
  const double sigma = effective_sigma(cfg, payload.values);
  perturb(payload.values, sigma, rng);
  return sigma;
}

}  // namespace spikefl::channel

#endif  // SPIKEFL_CHANNEL_CHANNEL_HPP
