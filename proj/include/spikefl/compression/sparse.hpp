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

#ifndef SPIKEFL_COMPRESSION_SPARSE_HPP
#define SPIKEFL_COMPRESSION_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "spikefl/errors.hpp"
#include "spikefl/fl/param_vector.hpp"

namespace spikefl::compression {

struct SparseEntry {
  std::uint32_t index = 0;
  double value = 0.0;

  bool operator==(const SparseEntry&) const = default;
};

/// Top-kappa payload: parameter values at selected indices, sorted by index.
///
/// Values are held at full precision while a payload travels through the
/// simulator; the wire codec narrows them to 32-bit floats.
struct SparseUpdate {
  std::uint32_t round = 0;
  std::uint32_t total_params = 0;
  std::vector<SparseEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }

  void validate() const {
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (entries[k].index >= total_params)
        throw CorruptPayloadError(
            "entry index " + std::to_string(entries[k].index) +
                " is not below total_params " + std::to_string(total_params),
            k);
      if (k > 0 && entries[k].index <= entries[k - 1].index)
        throw CorruptPayloadError("entry indices not strictly increasing", k);
    }
  }

  bool operator==(const SparseUpdate&) const = default;
};

/// How kappa * d is rounded to a selection size.
enum class Rounding { Floor, Ceil };

inline void require_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw InputError("kappa must lie in (0, 1], got " + std::to_string(kappa));
}

/// u = max(1, round(kappa * d)), never more than d. Products within 1e-9 of an
/// integer are snapped first so that e.g. 0.29 * 100 selects 29.
inline std::size_t selection_size(double kappa, std::size_t d,
                                  Rounding rounding = Rounding::Floor) {
  require_kappa(kappa);
  if (d == 0) return 0;
  const double raw = kappa * static_cast<double>(d);
  const double nearest = std::round(raw);
  double u;
  if (std::abs(raw - nearest) <= 1e-9 * std::max(1.0, raw))
    u = nearest;
  else
    u = rounding == Rounding::Floor ? std::floor(raw) : std::ceil(raw);
  return std::clamp<std::size_t>(static_cast<std::size_t>(u), 1, d);
}

/// Indices of the u largest |h|, ties to the smaller index, sorted ascending.
inline std::vector<std::uint32_t> top_indices(std::span<const double> h,
                                              std::size_t u) {
  if (h.size() > std::numeric_limits<std::uint32_t>::max())
    throw InputError("parameter count exceeds 32-bit wire indices");
  require_finite(h, "sparse_topk gradient");
  std::vector<std::uint32_t> idx(h.size());
  std::iota(idx.begin(), idx.end(), 0u);
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    const double ma = std::abs(h[a]), mb = std::abs(h[b]);
    return ma != mb ? ma > mb : a < b;
  };
  if (u < idx.size()) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(u),
                     idx.end(), before);
    idx.resize(u);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline SparseUpdate sparse_topk(std::span<const double> w,
                                std::span<const double> h, double kappa,
                                std::uint32_t round = 0,
                                Rounding rounding = Rounding::Floor) {
  require_kappa(kappa);
  if (w.size() != h.size())
    throw StructuralError("sparse_topk: parameter and gradient sizes differ");
  if (w.empty()) throw InputError("sparse_topk: empty parameter vector");
  const std::size_t u = selection_size(kappa, w.size(), rounding);
  SparseUpdate out{round, static_cast<std::uint32_t>(w.size()), {}};
  out.entries.reserve(u);
  for (std::uint32_t i : top_indices(h, u)) out.entries.push_back({i, w[i]});
  return out;
}

/// Selects by largest |h| but carries the parameter values of w.
inline SparseUpdate sparse_topk(const fl::ParamVector& w,
                                const fl::DeltaVector& h, double kappa,
                                std::uint32_t round = 0,
                                Rounding rounding = Rounding::Floor) {
  fl::require_congruent(w, h, "sparse_topk");
  return sparse_topk(w.values, h.values, kappa, round, rounding);
}

/// Every parameter, in order.
inline SparseUpdate dense_update(std::span<const double> w,
                                 std::uint32_t round = 0) {
  if (w.size() > std::numeric_limits<std::uint32_t>::max())
    throw InputError("parameter count exceeds 32-bit wire indices");
  SparseUpdate out{round, static_cast<std::uint32_t>(w.size()), {}};
  out.entries.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    out.entries.push_back({static_cast<std::uint32_t>(i), w[i]});
  return out;
}

/// Copy of `base` with the payload's positions overwritten.
inline fl::ParamVector merge_sparse(const fl::ParamVector& base,
                                    const SparseUpdate& upd) {
  if (upd.total_params != base.size())
    throw StructuralError("merge_sparse: payload describes " +
                          std::to_string(upd.total_params) +
                          " parameters, receiver holds " +
                          std::to_string(base.size()));
  fl::ParamVector out = base;
  for (std::size_t k = 0; k < upd.entries.size(); ++k) {
    const auto& e = upd.entries[k];
    if (e.index >= base.size())
      throw CorruptPayloadError("entry index " + std::to_string(e.index) +
                                    " out of range for " +
                                    std::to_string(base.size()) + " parameters",
                                k);
    out.values[e.index] = e.value;
  }
  return out;
}

}  // namespace spikefl::compression

#endif  // SPIKEFL_COMPRESSION_SPARSE_HPP
