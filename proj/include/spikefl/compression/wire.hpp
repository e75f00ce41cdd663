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

#ifndef SPIKEFL_COMPRESSION_WIRE_HPP
#define SPIKEFL_COMPRESSION_WIRE_HPP

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spikefl/compression/sparse.hpp"
#include "spikefl/errors.hpp"

namespace spikefl::compression {

// Little-endian layout:
//
//   0   "SPKF"
//   4   round          u32
//   8   total_params   u32
//   12  entry count u  u32
//   16  u x { index u32, value f32 bit pattern }
//
// Exactly 16 + 8u bytes.

inline constexpr std::size_t kWireHeaderBytes = 16;
inline constexpr std::size_t kWireEntryBytes = 8;
inline constexpr char kWireMagic[4] = {'S', 'P', 'K', 'F'};

constexpr std::uint64_t encoded_size(std::uint64_t entries) {
  return kWireHeaderBytes + kWireEntryBytes * entries;
}

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in,
                             std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(in[at + static_cast<std::size_t>(i)])
         << (8 * i);
  return v;
}

}  // namespace detail

/// Values are narrowed to 32-bit floats.
inline std::vector<std::uint8_t> encode(const SparseUpdate& upd) {
  upd.validate();
  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(upd.size()));
  for (char c : kWireMagic) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_u32(out, upd.round);
  detail::put_u32(out, upd.total_params);
  detail::put_u32(out, static_cast<std::uint32_t>(upd.size()));
  for (const auto& e : upd.entries) {
    detail::put_u32(out, e.index);
    detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(e.value)));
  }
  return out;
}

inline SparseUpdate decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kWireHeaderBytes)
    throw CorruptPayloadError("payload shorter than the 16-byte header",
                              bytes.size());
  for (std::size_t i = 0; i < 4; ++i)
    if (bytes[i] != static_cast<std::uint8_t>(kWireMagic[i]))
      throw CorruptPayloadError("bad magic, expected \"SPKF\"", i);
  SparseUpdate upd;
  upd.round = detail::get_u32(bytes, 4);
  upd.total_params = detail::get_u32(bytes, 8);
  const std::uint32_t count = detail::get_u32(bytes, 12);
  const std::uint64_t expected = encoded_size(count);
  if (bytes.size() != expected)
    throw CorruptPayloadError(
        "entry count " + std::to_string(count) + " implies " +
            std::to_string(expected) + " bytes, payload has " +
            std::to_string(bytes.size()),
        bytes.size() < expected ? bytes.size() : expected);
  upd.entries.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t at = kWireHeaderBytes + k * kWireEntryBytes;
    const std::uint32_t index = detail::get_u32(bytes, at);
    if (index >= upd.total_params)
      throw CorruptPayloadError("entry index " + std::to_string(index) +
                                    " not below total_params " +
                                    std::to_string(upd.total_params),
                                at);
    if (k > 0 && index <= upd.entries.back().index)
      throw CorruptPayloadError("entry indices not strictly increasing", at);
    const float value = std::bit_cast<float>(detail::get_u32(bytes, at + 4));
    upd.entries.push_back({index, static_cast<double>(value)});
  }
  return upd;
}

}  // namespace spikefl::compression

#endif  // SPIKEFL_COMPRESSION_WIRE_HPP
