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

#ifndef SPIKEFL_COMPRESSION_LEDGER_HPP
#define SPIKEFL_COMPRESSION_LEDGER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "spikefl/compression/wire.hpp"
#include "spikefl/errors.hpp"

namespace spikefl::compression {

enum class Link { Downlink, Uplink };

inline const char* to_string(Link link) {
  return link == Link::Downlink ? "down" : "up";
}

/// Transmitted vs. uncompressed parameter counts over some set of transfers.
struct ParamCounts {
  std::uint64_t transmitted = 0;
  std::uint64_t reference = 0;

  double fraction() const {
    return reference == 0 ? 0.0
                          : static_cast<double>(transmitted) /
                                static_cast<double>(reference);
  }

  bool operator==(const ParamCounts&) const = default;
};

struct TransferRecord {
  std::uint32_t round = 0;
  Link link = Link::Uplink;
  std::uint64_t transmitted = 0;
  std::uint64_t reference = 0;
  bool initial_broadcast = false;

  std::uint64_t bytes() const { return encoded_size(transmitted); }
};

/// Exact bandwidth accounting. All totals are integer parameter counts; the
/// fraction is a single division of two exact sums.
class BandwidthLedger {
 public:
  /// When set, fraction() leaves the one-time dense broadcast out of both
  /// numerator and denominator.
  explicit BandwidthLedger(bool exclude_initial_broadcast = false)
      : exclude_initial_(exclude_initial_broadcast) {}

  void record(std::uint32_t round, Link link, std::uint64_t transmitted,
              std::uint64_t reference, bool initial_broadcast = false) {
    if (transmitted > reference)
      throw InputError("ledger: transmitted count " +
                       std::to_string(transmitted) + " exceeds dense count " +
                       std::to_string(reference));
    records_.push_back({round, link, transmitted, reference, initial_broadcast});
    add(inclusive_, transmitted, reference);
    add(link == Link::Uplink ? uplink_ : downlink_, transmitted, reference);
    if (!initial_broadcast) add(exclusive_, transmitted, reference);
  }

  const ParamCounts& inclusive() const { return inclusive_; }
  const ParamCounts& exclusive() const { return exclusive_; }
  const ParamCounts& link(Link l) const {
    return l == Link::Uplink ? uplink_ : downlink_;
  }

  double fraction() const {
    return (exclude_initial_ ? exclusive_ : inclusive_).fraction();
  }

  std::uint64_t bytes(std::uint32_t round, Link l) const {
    std::uint64_t total = 0;
    for (const auto& r : records_)
      if (r.round == round && r.link == l) total += r.bytes();
    return total;
  }

  const std::vector<TransferRecord>& records() const { return records_; }

 private:
  static void add(ParamCounts& c, std::uint64_t t, std::uint64_t d) {
    c.transmitted += t;
    c.reference += d;
  }

  bool exclude_initial_;
  std::vector<TransferRecord> records_;
  ParamCounts inclusive_, exclusive_, uplink_, downlink_;
};

}  // namespace spikefl::compression

#endif  // SPIKEFL_COMPRESSION_LEDGER_HPP
