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

#ifndef SPIKEFL_FL_PARAM_VECTOR_HPP
#define SPIKEFL_FL_PARAM_VECTOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spikefl/errors.hpp"
#include "spikefl/snn/network.hpp"
#include "spikefl/tensor.hpp"

namespace spikefl::fl {

struct LayerShape {
  std::size_t layer = 0;
  Shape shape;

  bool operator==(const LayerShape&) const = default;
};

using Layout = std::vector<LayerShape>;

inline std::size_t layout_size(const Layout& layout) {
  std::size_t n = 0;
  for (const auto& l : layout) n += element_count(l.shape);
  return n;
}

/// Flat model parameters. Flattening is layer-major, row-major within each
/// [out, in] weight matrix.
struct ParamVector {
  std::vector<double> values;
  Layout layout;

  std::size_t size() const noexcept { return values.size(); }

  void validate() const {
    if (layout_size(layout) != values.size())
      throw StructuralError("parameter vector holds " +
                            std::to_string(values.size()) +
                            " values but its layout describes " +
                            std::to_string(layout_size(layout)));
  }

  bool operator==(const ParamVector&) const = default;
};

/// H = W_new - W_old, same layout as the parameter vectors it came from.
struct DeltaVector {
  std::vector<double> values;
  Layout layout;

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const DeltaVector&) const = default;
};

template <typename A, typename B>
void require_congruent(const A& a, const B& b, const char* what) {
  if (a.layout != b.layout || a.values.size() != b.values.size())
    throw StructuralError(std::string(what) + ": parameter layouts differ");
}

inline Layout layout_of(const snn::Network& net) {
  Layout layout;
  for (std::size_t l = 0; l < net.depth(); ++l)
    layout.push_back({l, net.layers[l].shape});
  return layout;
}

inline ParamVector flatten(const snn::Network& net) {
  ParamVector p{{}, layout_of(net)};
  p.values.reserve(net.param_count());
  for (const auto& layer : net.layers)
    p.values.insert(p.values.end(), layer.data.begin(), layer.data.end());
  return p;
}

/// Writes `params` into the weights of `net`; layouts must agree.
inline void load_params(snn::Network& net, const ParamVector& params) {
  if (params.layout != layout_of(net))
    throw StructuralError("parameter layout does not match network");
  params.validate();
  auto it = params.values.begin();
  for (auto& layer : net.layers) {
    std::copy_n(it, layer.size(), layer.data.begin());
    it += static_cast<std::ptrdiff_t>(layer.size());
  }
}

inline ParamVector zeros_like(const ParamVector& p) {
  return {std::vector<double>(p.size(), 0.0), p.layout};
}

/// Elementwise arithmetic mean with weight 1/|C|.
///
/// Each coordinate is summed in ascending order of value, so the result is
/// bitwise independent of client order.
inline ParamVector fed_avg(std::span<const ParamVector> clients) {
  if (clients.empty()) throw InputError("fed_avg: no client models");
  for (const auto& c : clients) {
    require_congruent(c, clients.front(), "fed_avg");
    require_finite(c.values, "fed_avg client model");
  }
  ParamVector out = zeros_like(clients.front());
  const auto n = static_cast<double>(clients.size());
  std::vector<double> column(clients.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t c = 0; c < clients.size(); ++c)
      column[c] = clients[c].values[i];
    if (column.size() > 1) std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double v : column) sum += v;
    out.values[i] = sum / n;
  }
  return out;
}

inline DeltaVector model_delta(const ParamVector& updated,
                               const ParamVector& base) {
  require_congruent(updated, base, "model_delta");
  DeltaVector d{std::vector<double>(updated.size()), updated.layout};
  for (std::size_t i = 0; i < d.size(); ++i)
    d.values[i] = updated.values[i] - base.values[i];
  return d;
}

inline ParamVector apply_delta(const ParamVector& base,
                               const DeltaVector& delta) {
  require_congruent(base, delta, "apply_delta");
  ParamVector out = base;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += delta.values[i];
  return out;
}

/// Mean absolute coordinate difference.
inline double mean_abs_distance(const ParamVector& a, const ParamVector& b) {
  require_congruent(a, b, "mean_abs_distance");
  if (a.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += std::abs(a.values[i] - b.values[i]);
  return sum / static_cast<double>(a.size());
}

}  // namespace spikefl::fl

#endif  // SPIKEFL_FL_PARAM_VECTOR_HPP
