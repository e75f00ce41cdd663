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

#ifndef SPIKEFL_DATA_LOADERS_HPP
#define SPIKEFL_DATA_LOADERS_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "spikefl/data/dataset.hpp"
#include "spikefl/errors.hpp"

namespace spikefl::data {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace detail {

inline std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

inline void require_bytes(const std::filesystem::path& path,
                          std::uint64_t expected, std::uint64_t actual) {
  if (actual < expected)
    throw FormatError(path.string() + ": truncated, expected " +
                      std::to_string(expected) + " bytes, found " +
                      std::to_string(actual));
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// MNIST IDX pair (ubyte images, ubyte labels). Pixels are divided by 255.
inline Dataset load_mnist_idx(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path) {
  const auto img = read_file(images_path);
  const auto lbl = read_file(labels_path);

  detail::require_bytes(images_path, 16, img.size());
  if (detail::be32(img, 0) != kIdxImagesMagic)
    throw FormatError(images_path.string() + ": bad IDX image magic");
  const std::uint64_t n = detail::be32(img, 4);
  const std::uint64_t rows = detail::be32(img, 8), cols = detail::be32(img, 12);
  detail::require_bytes(images_path, 16 + n * rows * cols, img.size());

  detail::require_bytes(labels_path, 8, lbl.size());
  if (detail::be32(lbl, 0) != kIdxLabelsMagic)
    throw FormatError(labels_path.string() + ": bad IDX label magic");
  const std::uint64_t n_labels = detail::be32(lbl, 4);
  detail::require_bytes(labels_path, 8 + n_labels, lbl.size());
  if (n_labels != n)
    throw FormatError("image/label count mismatch: " + std::to_string(n) +
                      " images vs " + std::to_string(n_labels) + " labels");

  const std::size_t features = rows * cols;
  Dataset ds{Tensor({n, features}), std::vector<int>(n), 10};
  for (std::size_t i = 0; i < n * features; ++i)
    ds.samples[i] = img[16 + i] / 255.0;
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = lbl[8 + i];
    if (ds.labels[i] >= ds.class_count)
      throw FormatError(labels_path.string() + ": label " +
                        std::to_string(ds.labels[i]) + " at record " +
                        std::to_string(i) + " is not a digit");
  }
  return ds;
}

/// Writes `ds` as an IDX pair; values are rounded to the nearest 1/255.
inline void save_mnist_idx(const Dataset& ds, std::size_t rows,
                           std::size_t cols,
                           const std::filesystem::path& images_path,
                           const std::filesystem::path& labels_path) {
  if (rows * cols != ds.features())
    throw StructuralError("save_mnist_idx: rows*cols != features");
  auto put_be32 = [](std::ofstream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                       static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(b, 4);
  };
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lbl(labels_path, std::ios::binary);
  if (!img || !lbl) throw FormatError("cannot write IDX files");
  put_be32(img, kIdxImagesMagic);
  put_be32(img, static_cast<std::uint32_t>(ds.size()));
  put_be32(img, static_cast<std::uint32_t>(rows));
  put_be32(img, static_cast<std::uint32_t>(cols));
  for (double v : ds.samples.data)
    img.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0))));
  put_be32(lbl, kIdxLabelsMagic);
  put_be32(lbl, static_cast<std::uint32_t>(ds.size()));
  for (int y : ds.labels) lbl.put(static_cast<char>(y));
}

inline constexpr std::size_t kCifarRecordBytes = 1 + 3072;

/// CIFAR-10 binary batches: records of one label byte and 3072 pixel bytes
/// (R plane, G plane, B plane). Files are concatenated in the given order.
inline Dataset load_cifar10_binary(
    std::span<const std::filesystem::path> batch_files,
    std::ostream& log = std::clog) {
  std::vector<std::vector<std::uint8_t>> blobs;
  std::size_t n = 0;
  for (const auto& path : batch_files) {
    auto bytes = read_file(path);
    if (bytes.size() % kCifarRecordBytes != 0)
      throw FormatError(path.string() + ": size " +
                        std::to_string(bytes.size()) +
                        " is not a multiple of 3073-byte records");
    if (bytes.empty()) log << "warning: " << path.string() << " is empty\n";
    n += bytes.size() / kCifarRecordBytes;
    blobs.push_back(std::move(bytes));
  }
  Dataset ds{Tensor({n, 3072}), std::vector<int>(n), 10};
  std::size_t row = 0;
  for (const auto& bytes : blobs) {
    for (std::size_t at = 0; at < bytes.size(); at += kCifarRecordBytes, ++row) {
      ds.labels[row] = bytes[at];
      if (ds.labels[row] >= 10)
        throw FormatError("CIFAR-10 label " + std::to_string(ds.labels[row]) +
                          " at record " + std::to_string(row));
      auto dst = ds.samples.row(row);
      for (std::size_t f = 0; f < 3072; ++f) dst[f] = bytes[at + 1 + f] / 255.0;
    }
  }
  return ds;
}

}  // namespace spikefl::data

#endif  // SPIKEFL_DATA_LOADERS_HPP
