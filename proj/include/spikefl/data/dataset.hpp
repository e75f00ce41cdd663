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

#ifndef SPIKEFL_DATA_DATASET_HPP
#define SPIKEFL_DATA_DATASET_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "spikefl/errors.hpp"
#include "spikefl/random.hpp"
#include "spikefl/tensor.hpp"

namespace spikefl::data {

/// Samples [n, features] with intensities in [0, 1] and labels in
/// [0, class_count).
struct Dataset {
  Tensor samples{Shape{0, 0}};
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t features() const { return samples.dim(1); }

  void validate() const {
    if (samples.rank() != 2 || samples.dim(0) != labels.size())
      throw StructuralError("dataset holds " + shape_string(samples.shape) +
                            " samples for " + std::to_string(labels.size()) +
                            " labels");
    for (int y : labels)
      if (y < 0 || y >= class_count)
        throw FormatError("label " + std::to_string(y) + " outside [0, " +
                          std::to_string(class_count) + ")");
    for (double v : samples.data)
      if (!(v >= 0.0 && v <= 1.0))
        throw FormatError("sample value outside [0, 1]");
  }

  /// Rows `idx` as a [idx.size(), features] tensor.
  Tensor gather(std::span<const std::size_t> idx) const {
    const std::size_t f = features();
    Tensor out({idx.size(), f});
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto src = samples.row(idx[k]);
      std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
  }

  std::vector<int> gather_labels(std::span<const std::size_t> idx) const {
    std::vector<int> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(labels[i]);
    return out;
  }

  /// First n samples (all of them when n == 0 or n >= size()).
  Dataset head(std::size_t n) const {
    if (n == 0 || n >= size()) return *this;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return {gather(idx), gather_labels(idx), class_count};
  }

  bool operator==(const Dataset&) const = default;
};

/// Per-client sample indices.
struct Partition {
  std::vector<std::vector<std::size_t>> clients;
  std::size_t dropped = 0;
};

/// Uniform shuffle, then equal contiguous slices; the n mod |C| leftover
/// samples are dropped and counted.
inline Partition partition_iid(std::size_t n, std::size_t num_clients,
                               Rng& rng) {
  if (num_clients == 0) throw InputError("partition_iid: need >= 1 client");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(order), rng);
  const std::size_t per = n / num_clients;
  Partition p;
  p.dropped = n - per * num_clients;
  for (std::size_t c = 0; c < num_clients; ++c)
    p.clients.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(c * per),
                           order.begin() + static_cast<std::ptrdiff_t>((c + 1) * per));
  return p;
}

inline Partition partition_iid(const Dataset& ds, std::size_t num_clients,
                               Rng& rng) {
  return partition_iid(ds.size(), num_clients, rng);
}

/// Class-conditional Gaussian blobs clipped to [0, 1].
///
/// Class c is centred at 0.5 + 0.5 * separation * s_c, where s_c is a random
/// +-1 sign pattern (distinct across classes when features allow); samples add
/// N(0, 0.15) per feature. Labels cycle 0..classes-1 before a final shuffle,
/// so classes are balanced to within one sample.
inline Dataset make_synthetic(int classes, std::size_t features, std::size_t n,
                              double separation, Rng& rng) {
  if (classes < 1) throw InputError("make_synthetic: classes must be >= 1");
  if (n < static_cast<std::size_t>(classes))
    throw InputError("make_synthetic: need n >= classes");
  if (features == 0) throw InputError("make_synthetic: features must be >= 1");

  std::vector<std::vector<double>> sign(static_cast<std::size_t>(classes));
  for (std::size_t c = 0; c < sign.size(); ++c) {
    for (int attempt = 0;; ++attempt) {
      sign[c].resize(features);
      for (double& s : sign[c]) s = rng.bernoulli(0.5) ? 1.0 : -1.0;
      bool duplicate = false;
      for (std::size_t k = 0; k < c; ++k) duplicate |= sign[k] == sign[c];
      if (!duplicate || attempt > 64) break;
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(order), rng);

  Dataset ds{Tensor({n, features}), std::vector<int>(n), classes};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t slot = order[k];
    const int label = static_cast<int>(k % static_cast<std::size_t>(classes));
    ds.labels[slot] = label;
    auto row = ds.samples.row(slot);
    for (std::size_t f = 0; f < features; ++f) {
      const double centre =
          0.5 + 0.5 * separation * sign[static_cast<std::size_t>(label)][f];
      row[f] = std::clamp(centre + 0.15 * rng.normal(), 0.0, 1.0);
    }
  }
  return ds;
}

}  // namespace spikefl::data

#endif  // SPIKEFL_DATA_DATASET_HPP
