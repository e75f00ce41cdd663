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

#ifndef SPIKEFL_SNN_LIF_HPP
#define SPIKEFL_SNN_LIF_HPP

#include <cmath>
#include <string>

#include "spikefl/errors.hpp"
#include "spikefl/tensor.hpp"

namespace spikefl::snn {

/// Leaky integrate-and-fire parameters. beta == 1 is the non-leaky IF neuron.
struct LifConfig {
  double beta = 0.95;
  double threshold = 1.0;
  /// Peak of the triangular surrogate derivative.
  double xi = 0.3;
  int timesteps = 25;

  void validate() const {
    if (!(beta > 0.0 && beta <= 1.0))
      throw InputError("lif.beta must lie in (0, 1], got " +
                       std::to_string(beta));
    if (!(threshold > 0.0))
      throw InputError("lif.threshold must be > 0, got " +
                       std::to_string(threshold));
    if (!(xi > 0.0))
      throw InputError("lif.xi must be > 0, got " + std::to_string(xi));
    if (timesteps < 1)
      throw InputError("lif.timesteps must be >= 1, got " +
                       std::to_string(timesteps));
  }

  bool operator==(const LifConfig&) const = default;
};

/// How a membrane potential becomes a spike in the forward pass.
///
/// Spiking is the Heaviside step used for training and inference. Smooth
/// replaces the step by the antiderivative of the surrogate triangle, so the
/// forward pass is differentiable and BPTT can be checked against finite
/// differences. Both modes share the backward pass.
enum class SpikeMode { Spiking, Smooth };

/// d(spike)/d(membrane) stand-in: xi * max(0, 1 - |(u - thr) / thr|).
inline double surrogate_grad(double u, const LifConfig& cfg) noexcept {
  const double x = 1.0 - std::abs((u - cfg.threshold) / cfg.threshold);
  return x > 0.0 ? cfg.xi * x : 0.0;
}

/// Integral of surrogate_grad from 0 to u: a quadratic ramp from 0 at u = 0
/// to xi * thr at u = 2 * thr, constant outside.
inline double smooth_spike(double u, const LifConfig& cfg) noexcept {
  const double thr = cfg.threshold;
  if (u <= 0.0) return 0.0;
  if (u <= thr) return cfg.xi * u * u / (2.0 * thr);
  if (u < 2.0 * thr) {
    const double e = u - thr;
    return cfg.xi * (0.5 * thr + e - e * e / (2.0 * thr));
  }
  return cfg.xi * thr;
}

inline double spike(double u, const LifConfig& cfg, SpikeMode mode) noexcept {
  if (mode == SpikeMode::Smooth) return smooth_spike(u, cfg);
  return u > cfg.threshold ? 1.0 : 0.0;
}

/// U^t = I^t + beta * U^{t-1} - S^{t-1} * thr (subtractive reset).
inline double membrane_update(double weighted_input, double prev_membrane,
                              double prev_spike,
                              const LifConfig& cfg) noexcept {
  return weighted_input + cfg.beta * prev_membrane -
         prev_spike * cfg.threshold;
}

struct LifLayerState {
  Tensor membrane;
  Tensor prev_spikes;

  static LifLayerState zeros(std::size_t width) {
    return {Tensor({width}), Tensor({width})};
  }
};

struct LifStepResult {
  LifLayerState state;
  Tensor spikes;
};

/// One timestep of a layer of LIF neurons. weighted_input is the already
/// computed synaptic drive sum_j W_ij S_j for each neuron.
inline LifStepResult lif_step(const LifLayerState& state,
                              const Tensor& weighted_input,
                              const LifConfig& cfg,
                              SpikeMode mode = SpikeMode::Spiking) {
  require_same_shape(state.membrane, weighted_input, "lif_step");
  require_same_shape(state.prev_spikes, weighted_input, "lif_step");
  require_finite(weighted_input.data, "lif_step input");
  require_finite(state.membrane.data, "lif_step membrane");

  LifStepResult out{{Tensor(weighted_input.shape),
                     Tensor(weighted_input.shape)},
                    Tensor(weighted_input.shape)};
  for (std::size_t i = 0; i < weighted_input.size(); ++i) {
    const double u = membrane_update(weighted_input[i], state.membrane[i],
                                     state.prev_spikes[i], cfg);
    const double s = spike(u, cfg, mode);
    out.state.membrane[i] = u;
    out.state.prev_spikes[i] = s;
    out.spikes[i] = s;
  }
  return out;
}

}  // namespace spikefl::snn

#endif  // SPIKEFL_SNN_LIF_HPP
