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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "checks.hpp"
#include "spikefl/spikefl.hpp"

using namespace spikefl;
using channel::ChannelConfig;
using channel::NoiseMode;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "spikefl_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

}  // namespace

TEST(Channel, EffectiveSigmaExamples) {
  const std::vector<double> v{1, -3, 2};
  EXPECT_DOUBLE_EQ(effective_sigma(ChannelConfig{NoiseMode::Relative, 0.1}, v), 0.2);
  EXPECT_EQ(effective_sigma(ChannelConfig{NoiseMode::Absolute, 0.03}, v), 0.03);
  EXPECT_EQ(effective_sigma(ChannelConfig{NoiseMode::Relative, 0.3},
                            std::vector<double>{0, 0, 0}),
            0.0);
  EXPECT_EQ(effective_sigma(ChannelConfig{}, v), 0.0);
  EXPECT_THROW(effective_sigma(ChannelConfig{NoiseMode::Relative, 0.1}, std::vector<double>{}),
               InputError);
  EXPECT_THROW((ChannelConfig{NoiseMode::Absolute, -1}.validate()), InputError);
}

TEST(Channel, ZeroSigmaAndSeeds) {
  std::vector<double> v{1, 2, 3};
  Rng rng(1);
  channel::perturb(v, 0.0, rng);
  EXPECT_EQ(v, (std::vector<double>{1, 2, 3}));
  Rng a(77), b(77);
  EXPECT_EQ(channel::perturbed(v, 0.5, a), channel::perturbed(v, 0.5, b));
}

TEST(Channel, GaussianMoments) {
  std::vector<double> v(1000000, 0.0);
  Rng rng(derive_seed(3, Stream::Test));
  channel::perturb(v, 0.02, rng);
  double sum = 0, sq = 0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  for (double x : v) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / static_cast<double>(v.size() - 1));
  EXPECT_NEAR(sd, 0.02, 0.0002);
  EXPECT_LT(std::abs(mean), 3 * 0.02 / 1000);
}

TEST(Channel, TransmitTouchesValuesOnly) {
  compression::SparseUpdate upd{4, 10, {{1, 0.5}, {6, -1.5}}};
  auto noisy = upd;
  Rng rng(5);
  const double sigma = channel::transmit(noisy, {NoiseMode::Relative, 0.2}, rng);
  EXPECT_DOUBLE_EQ(sigma, 0.2 * 1.0);
  ASSERT_EQ(noisy.size(), 2u);
  EXPECT_EQ(noisy.entries[1].index, 6u);
  EXPECT_EQ(noisy.round, 4u);
  EXPECT_NE(noisy.entries[0].value, 0.5);
  auto clean = upd;
  channel::transmit(clean, {}, rng);
  EXPECT_EQ(clean, upd);
}

TEST(Channel, RelativeNoiseIsHomogeneous) {
  Rng gen(derive_seed(4, Stream::Test));
  std::vector<double> w(50);
  for (double& v : w) v = gen.normal();
  for (int i = 0; i < 100; ++i) {
    const double c = std::exp(gen.uniform(-5, 5));
    fl::ParamVector a{w, {{0, Shape{1, 50}}}}, b = a;
    for (double& v : b.values) v *= c;
    Rng ra(i), rb(i);
    const double sa = channel::transmit(a, {NoiseMode::Relative, 0.3}, ra);
    const double sb = channel::transmit(b, {NoiseMode::Relative, 0.3}, rb);
    EXPECT_LE(oracle::relative_error(sb, c * sa), 1e-12);
    for (std::size_t k = 0; k < w.size(); ++k)
      EXPECT_LE(std::abs(b.values[k] - c * a.values[k]), 1e-12 * c * (1 + std::abs(a.values[k])));
  }
}

TEST(Partition, Examples) {
  Rng rng(1);
  auto p = data::partition_iid(100, 5, rng);
  ASSERT_EQ(p.clients.size(), 5u);
  std::set<std::size_t> seen;
  for (const auto& c : p.clients) {
    EXPECT_EQ(c.size(), 20u);
    seen.insert(c.begin(), c.end());
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(p.dropped, 0u);

  auto one = data::partition_iid(37, 1, rng);
  EXPECT_EQ(one.clients[0].size(), 37u);
  auto odd = data::partition_iid(103, 5, rng);
  EXPECT_EQ(odd.dropped, 3u);
  EXPECT_THROW(data::partition_iid(10, 0, rng), InputError);
  Rng a(9), b(9);
  EXPECT_EQ(data::partition_iid(50, 3, a).clients, data::partition_iid(50, 3, b).clients);
}

TEST(Synthetic, DeterministicBalancedInRange) {
  Rng a(3), b(3);
  const auto x = data::make_synthetic(4, 8, 101, 0.5, a);
  EXPECT_EQ(x, data::make_synthetic(4, 8, 101, 0.5, b));
  x.validate();
  std::vector<int> count(4, 0);
  for (int y : x.labels) ++count[static_cast<std::size_t>(y)];
  EXPECT_EQ(*std::max_element(count.begin(), count.end()) -
                *std::min_element(count.begin(), count.end()),
            1);
}

TEST(Synthetic, WideSeparationIsLinearlySeparable) {
  // Nearest-centroid is a linear classifier; fit it on train, score on test.
  Rng rng(21);
  const auto train = data::make_synthetic(5, 32, 500, 1.0, rng);
  Rng rng2(21);
  const auto all = data::make_synthetic(5, 32, 1000, 1.0, rng2);
  std::vector<std::vector<double>> centre(5, std::vector<double>(32, 0.0));
  std::vector<int> n(5, 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto y = static_cast<std::size_t>(train.labels[i]);
    ++n[y];
    for (std::size_t f = 0; f < 32; ++f) centre[y][f] += train.samples.at(i, f);
  }
  for (std::size_t c = 0; c < 5; ++c)
    for (double& v : centre[c]) v /= n[c];
  std::size_t correct = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < 5; ++c) {
      double d = 0;
      for (std::size_t f = 0; f < 32; ++f) d += std::pow(all.samples.at(i, f) - centre[c][f], 2);
      if (d < best_d) best_d = d, best = c;
    }
    correct += best == static_cast<std::size_t>(all.labels[i]);
  }
  EXPECT_EQ(correct, all.size());
}

TEST(Idx, RoundTripAndZeros) {
  data::Dataset ds{Tensor({3, 4}), {0, 5, 9}, 10};
  for (std::size_t i = 0; i < ds.samples.size(); ++i) ds.samples[i] = (i * 20 % 256) / 255.0;
  const auto img = scratch("rt-images"), lbl = scratch("rt-labels");
  data::save_mnist_idx(ds, 2, 2, img, lbl);
  EXPECT_EQ(data::load_mnist_idx(img, lbl), ds);

  data::Dataset zeros{Tensor({2, 4}), {1, 1}, 10};
  data::save_mnist_idx(zeros, 2, 2, img, lbl);
  for (double v : data::load_mnist_idx(img, lbl).samples.data) EXPECT_EQ(v, 0.0);
}

TEST(Idx, TruncatedFileNamesByteCounts) {
  data::Dataset ds{Tensor({3, 4}), {0, 1, 2}, 10};
  const auto img = scratch("tr-images"), lbl = scratch("tr-labels");
  data::save_mnist_idx(ds, 2, 2, img, lbl);
  auto bytes = data::read_file(img);
  bytes.resize(bytes.size() - 5);
  write_bytes(img, bytes);
  try {
    data::load_mnist_idx(img, lbl);
    FAIL() << "no error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("expected 28 bytes, found 23"), std::string::npos)
        << e.what();
  }
}

TEST(Idx, RejectsBadMagicAndCountMismatch) {
  data::Dataset ds{Tensor({2, 4}), {0, 1}, 10};
  const auto img = scratch("bm-images"), lbl = scratch("bm-labels");
  data::save_mnist_idx(ds, 2, 2, img, lbl);
  data::Dataset three{Tensor({3, 4}), {0, 1, 2}, 10};
  const auto img3 = scratch("bm3-images"), lbl3 = scratch("bm3-labels");
  data::save_mnist_idx(three, 2, 2, img3, lbl3);
  EXPECT_THROW(data::load_mnist_idx(img, lbl3), FormatError);
  EXPECT_THROW(data::load_mnist_idx(lbl, img), FormatError);
}

TEST(Idx, BundledSubsetHeaders) {
  const fs::path dir = fs::path(SPIKEFL_SOURCE_DIR) / "data" / "mnist";
  const auto raw = data::read_file(dir / "t10k-images-idx3-ubyte");
  auto be = [&](std::size_t at) {
    return (raw[at] << 24) | (raw[at + 1] << 16) | (raw[at + 2] << 8) | raw[at + 3];
  };
  const auto test = data::load_mnist_idx(dir / "t10k-images-idx3-ubyte",
                                         dir / "t10k-labels-idx1-ubyte");
  EXPECT_EQ(test.size(), static_cast<std::size_t>(be(4)));
  EXPECT_EQ(test.features(), static_cast<std::size_t>(be(8) * be(12)));
  EXPECT_EQ(test.size(), 1000u);
  EXPECT_EQ(test.features(), 784u);
  const auto train = data::load_mnist_idx(dir / "train-images-idx3-ubyte",
                                          dir / "train-labels-idx1-ubyte");
  EXPECT_EQ(train.size(), 2000u);
}

TEST(Cifar, RecordRoundTripEmptyAndBadSize) {
  std::vector<std::uint8_t> rec(3073);
  rec[0] = 7;
  for (std::size_t i = 1; i < rec.size(); ++i) rec[i] = static_cast<std::uint8_t>(i * 31);
  const auto one = scratch("cifar-one.bin"), empty = scratch("cifar-empty.bin"),
             bad = scratch("cifar-bad.bin");
  write_bytes(one, rec);
  write_bytes(empty, {});
  write_bytes(bad, std::vector<std::uint8_t>(100));
  std::ostringstream log;
  const std::vector<fs::path> both{one, empty};
  const auto ds = data::load_cifar10_binary(both, log);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.features(), 3072u);
  EXPECT_EQ(ds.labels[0], 7);
  for (std::size_t f = 0; f < 3072; ++f) ASSERT_EQ(ds.samples[f], rec[f + 1] / 255.0);
  EXPECT_NE(log.str().find("empty"), std::string::npos);
  const std::vector<fs::path> only_empty{empty};
  EXPECT_EQ(data::load_cifar10_binary(only_empty, log).size(), 0u);
  const std::vector<fs::path> b{bad};
  EXPECT_THROW(data::load_cifar10_binary(b, log), FormatError);
}
