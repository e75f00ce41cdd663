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

#ifndef SPIKEFL_SNN_ENCODING_HPP
#define SPIKEFL_SNN_ENCODING_HPP

#include <cstddef>
#include <string>
#include <utility>

#include "spikefl/errors.hpp"
#include "spikefl/random.hpp"
#include "spikefl/tensor.hpp"

namespace spikefl::snn {

/// Spike tensor laid out [timesteps, batch, features].
struct SpikeBatch {
  Tensor spikes;

  SpikeBatch() = default;
  explicit SpikeBatch(Tensor t) : spikes(std::move(t)) {
    if (spikes.rank() != 3)
      throw StructuralError("spike batch must be rank 3 [T, batch, features]");
  }

  std::size_t timesteps() const { return spikes.dim(0); }
  std::size_t batch() const { return spikes.dim(1); }
  std::size_t features() const { return spikes.dim(2); }

  std::span<const double> frame(std::size_t t, std::size_t b) const {
    return {spikes.data.data() + (t * batch() + b) * features(), features()};
  }
};

/// Bernoulli rate code: at every timestep each feature fires with probability
/// equal to its intensity. `batch` is [batch, features] with values in [0,1].
inline SpikeBatch rate_encode(const Tensor& batch, int timesteps, Rng& rng) {
  if (batch.rank() != 2)
    throw StructuralError("rate_encode expects a [batch, features] tensor");
  if (timesteps < 1) throw InputError("rate_encode: timesteps must be >= 1");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double p = batch[i];
    if (!(p >= 0.0 && p <= 1.0))
      throw InputError("rate_encode: intensity " + std::to_string(p) +
                       " at flat index " + std::to_string(i) +
                       " outside [0, 1]");
  }
  const auto steps = static_cast<std::size_t>(timesteps);
  Tensor out({steps, batch.dim(0), batch.dim(1)});
  std::size_t k = 0;
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t i = 0; i < batch.size(); ++i)
      out[k++] = rng.bernoulli(batch[i]) ? 1.0 : 0.0;
  return SpikeBatch(std::move(out));
}

}  // namespace spikefl::snn

#endif  // SPIKEFL_SNN_ENCODING_HPP
