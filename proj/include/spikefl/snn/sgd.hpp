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

#ifndef SPIKEFL_SNN_SGD_HPP
#define SPIKEFL_SNN_SGD_HPP

#include <span>
#include <string>

#include "spikefl/errors.hpp"
#include "spikefl/snn/network.hpp"

namespace spikefl::snn {

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.95;
  double weight_decay = 0.0;

  void validate() const {
    if (!(learning_rate > 0.0))
      throw InputError("optim.lr must be > 0, got " +
                       std::to_string(learning_rate));
    if (!(momentum >= 0.0 && momentum < 1.0))
      throw InputError("optim.momentum must lie in [0, 1), got " +
                       std::to_string(momentum));
    if (!(weight_decay >= 0.0))
      throw InputError("optim.weight_decay must be >= 0, got " +
                       std::to_string(weight_decay));
  }

  bool operator==(const SgdConfig&) const = default;
};

/// buffer <- momentum * buffer + grad + weight_decay * param
/// param  <- param - lr * buffer
inline void sgd_step(std::span<double> params, std::span<const double> grads,
                     const SgdConfig& cfg, std::span<double> buffer) {
  if (params.size() != grads.size() || params.size() != buffer.size())
    throw StructuralError("sgd_step: params/grads/buffer sizes differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    buffer[i] = cfg.momentum * buffer[i] + grads[i] +
                cfg.weight_decay * params[i];
    params[i] -= cfg.learning_rate * buffer[i];
  }
}

inline void sgd_step(Network& net, const GradAccumulator& grads,
                     const SgdConfig& cfg, GradAccumulator& buffers) {
  if (grads.layers.size() != net.depth() || buffers.layers.size() != net.depth())
    throw StructuralError("sgd_step: gradient depth does not match network");
  for (std::size_t l = 0; l < net.depth(); ++l) {
    require_same_shape(net.layers[l], grads.layers[l], "sgd_step gradient");
    require_same_shape(net.layers[l], buffers.layers[l], "sgd_step buffer");
    sgd_step(net.layers[l].data, grads.layers[l].data, cfg,
             buffers.layers[l].data);
  }
}

}  // namespace spikefl::snn

#endif  // SPIKEFL_SNN_SGD_HPP
