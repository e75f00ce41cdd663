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

#ifndef SPIKEFL_TENSOR_HPP
#define SPIKEFL_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spikefl/errors.hpp"

namespace spikefl {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

inline bool all_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Dense row-major array of doubles.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;

  explicit Tensor(Shape s, double fill = 0.0)
      : shape(std::move(s)), data(element_count(shape), fill) {}

  Tensor(Shape s, std::vector<double> values)
      : shape(std::move(s)), data(std::move(values)) {
    if (element_count(shape) != data.size())
      throw StructuralError("tensor shape " + shape_string(shape) +
                            " does not hold " + std::to_string(data.size()) +
                            " values");
  }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  /// Rank-2 access.
  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data[r * shape[1] + c];
  }

  std::span<double> row(std::size_t r) {
    return {data.data() + r * shape[1], shape[1]};
  }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * shape[1], shape[1]};
  }

  bool operator==(const Tensor&) const = default;
};

inline void require_same_shape(const Tensor& a, const Tensor& b,
                               const char* what) {
  if (a.shape != b.shape)
    throw StructuralError(std::string(what) + ": shape " +
                          shape_string(a.shape) + " vs " +
                          shape_string(b.shape));
}

inline void require_finite(std::span<const double> values, const char* what) {
  if (!all_finite(values))
    throw NumericError(std::string(what) + ": non-finite value");
}

}  // namespace spikefl

#endif  // SPIKEFL_TENSOR_HPP
