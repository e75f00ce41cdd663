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

#ifndef SPIKEFL_ERRORS_HPP
#define SPIKEFL_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spikefl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes, layouts or lengths that do not compose.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf where finite values are required, or a diverged model.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A value outside an operation's domain (kappa > 1, label out of range, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (IDX, CIFAR-10, metrics CSV).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration; the message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Truncated or garbled wire payload.
class CorruptPayloadError : public Error {
 public:
  CorruptPayloadError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace spikefl

#endif  // SPIKEFL_ERRORS_HPP
