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

#ifndef SPIKEFL_FL_ENGINE_HPP
#define SPIKEFL_FL_ENGINE_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "spikefl/channel/channel.hpp"
#include "spikefl/compression/ledger.hpp"
#include "spikefl/compression/schedule.hpp"
#include "spikefl/compression/sparse.hpp"
#include "spikefl/data/dataset.hpp"
#include "spikefl/errors.hpp"
#include "spikefl/fl/param_vector.hpp"
#include "spikefl/random.hpp"
#include "spikefl/snn/encoding.hpp"
#include "spikefl/snn/network.hpp"
#include "spikefl/snn/sgd.hpp"

namespace spikefl::fl {

struct ModelSpec {
  snn::ModelKind kind = snn::ModelKind::Snn;
  std::vector<std::size_t> widths{784, 128, 10};
  snn::LifConfig lif;

  bool operator==(const ModelSpec&) const = default;
};

struct FlConfig {
  std::size_t num_clients = 5;
  int rounds = 100;
  int local_epochs = 1;
  std::size_t batch_size = 32;
  ModelSpec model;
  snn::SgdConfig optimizer;
  channel::ChannelConfig channel;
  compression::CompressionSchedule compression;
  compression::Rounding rounding = compression::Rounding::Floor;
  /// Round 1 has no previous global delta to rank by, so the initial model is
  /// broadcast in full.
  bool dense_first_broadcast = true;
  std::uint64_t seed = 1;
  /// Threads simulating clients in parallel; results do not depend on it.
  std::size_t workers = 1;
  std::size_t eval_batch = 250;

  /// Throws ConfigError listing every invalid field.
  void validate() const {
    std::vector<std::string> problems;
    auto check = [&](bool ok, const std::string& msg) {
      if (!ok) problems.push_back(msg);
    };
    auto nested = [&](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        problems.emplace_back(e.what());
      }
    };
    check(num_clients >= 1, "fl.clients must be >= 1");
    check(rounds >= 1, "fl.rounds must be >= 1");
    check(local_epochs >= 1, "fl.local_epochs must be >= 1");
    check(batch_size >= 1, "fl.batch_size must be >= 1");
    check(workers >= 1, "fl.workers must be >= 1");
    check(eval_batch >= 1, "fl.eval_batch must be >= 1");
    check(model.widths.size() >= 2, "model.layers needs >= 2 widths");
    for (std::size_t w : model.widths) check(w >= 1, "model.layers has a zero width");
    if (model.kind == snn::ModelKind::Snn) nested([&] { model.lif.validate(); });
    nested([&] { optimizer.validate(); });
    nested([&] { channel.validate(); });
    nested([&] { compression.validate(); });
    if (!problems.empty()) {
      std::string msg = "invalid configuration:";
      for (const auto& p : problems) msg += "\n  " + p;
      throw ConfigError(msg);
    }
  }
};

struct ClientState {
  std::size_t id = 0;
  ParamVector local_model;
  /// The client's copy of the global model, built from merged downlink
  /// payloads. Can drift from the server's model under sparsification.
  ParamVector reference_global;
  snn::GradAccumulator momentum;
  std::vector<std::size_t> indices;
};

struct RoundMetrics {
  std::uint32_t round = 0;
  double kappa = 1.0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  double cum_frac_incl = 0.0;
  double cum_frac_excl = 0.0;
  /// Mean over clients of the mean |reference_global - server global| after
  /// the downlink merge.
  double client_drift = 0.0;

  bool operator==(const RoundMetrics&) const = default;
};

/// Trains client.local_model in place for one round; returns the mean
/// per-sample training loss.
using LocalTrainer = std::function<double(ClientState&, std::uint32_t round)>;

struct Protocol {
  channel::ChannelConfig channel;
  compression::Rounding rounding = compression::Rounding::Floor;
  bool dense_first_broadcast = true;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

struct RoundResult {
  ParamVector global;
  RoundMetrics metrics;
  compression::SparseUpdate downlink;  // before channel noise
  std::vector<compression::SparseUpdate> uplink;  // as received by the server
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
/// by index is rethrown after all threads join.
inline void parallel_for(std::size_t n, std::size_t workers,
                         const std::function<void(std::size_t)>& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::uint64_t link_seed(std::uint64_t master, std::uint32_t round,
                               std::size_t client, compression::Link link) {
  return derive_seed(master, Stream::Noise, round, client,
                     link == compression::Link::Downlink ? 0 : 1);
}

/// One global round.
///
/// Stage 1: the server ranks W_{r-1} by |W_{r-1} - W_{r-2}| and sends the top
///   kappa fraction (in full on round 1 when dense_first_broadcast is set);
///   every client receives its own noisy copy and merges it into its
///   reference_global.
/// Stage 2: each client trains from its reference_global, ranks the result by
///   its local delta and uploads the top kappa fraction through the uplink.
/// Stage 3: the server overlays each upload on W_{r-1} and averages.
///
/// Test metrics are left at zero; run_training fills them in.
inline RoundResult run_round(std::uint32_t round, const ParamVector& global,
                             const ParamVector& prev_global,
                             std::span<ClientState> clients, double kappa,
                             const Protocol& protocol,
                             const LocalTrainer& trainer,
                             compression::BandwidthLedger& ledger) {
  using compression::Link;
  if (round < 1) throw InputError("run_round: rounds are numbered from 1");
  compression::require_kappa(kappa);
  require_congruent(global, prev_global, "run_round");
  if (clients.empty()) throw InputError("run_round: no clients");
  const std::uint64_t d = global.size();

  RoundResult out;
  out.metrics.round = round;
  out.metrics.kappa = kappa;

  // Stage 1
  const bool dense = round == 1 && protocol.dense_first_broadcast;
  out.downlink = dense ? compression::dense_update(global.values, round)
                       : compression::sparse_topk(global,
                                                  model_delta(global, prev_global),
                                                  kappa, round, protocol.rounding);
  for (auto& client : clients) {
    auto payload = out.downlink;
    Rng rng(link_seed(protocol.seed, round, client.id, Link::Downlink));
    channel::transmit(payload, protocol.channel, rng);
    if (client.reference_global.layout != global.layout)
      client.reference_global = zeros_like(global);
    client.reference_global = compression::merge_sparse(client.reference_global, payload);
  }

  // Stage 2
  std::vector<double> losses(clients.size());
  out.uplink.resize(clients.size());
  parallel_for(clients.size(), protocol.workers, [&](std::size_t i) {
    ClientState& client = clients[i];
    client.local_model = client.reference_global;
    compression::SparseUpdate payload;
    try {
      losses[i] = trainer(client, round);
      require_congruent(client.local_model, global, "local training result");
      payload = compression::sparse_topk(
          client.local_model, model_delta(client.local_model, client.reference_global),
          kappa, round, protocol.rounding);
    } catch (const NumericError& e) {
      throw NumericError("round " + std::to_string(round) + ", client " +
                         std::to_string(client.id) + ": " + e.what());
    }
    Rng rng(link_seed(protocol.seed, round, client.id, Link::Uplink));
    channel::transmit(payload, protocol.channel, rng);
    out.uplink[i] = std::move(payload);
  });

  // Stage 3
  std::vector<ParamVector> reconstructed;
  reconstructed.reserve(clients.size());
  for (const auto& payload : out.uplink)
    reconstructed.push_back(compression::merge_sparse(global, payload));
  try {
    out.global = fed_avg(reconstructed);
  } catch (const NumericError& e) {
    throw NumericError("round " + std::to_string(round) +
                       ": aggregated model is not finite (" + e.what() + ")");
  }

  for (std::size_t c = 0; c < clients.size(); ++c)
    ledger.record(round, Link::Downlink, out.downlink.size(), d, dense);
  for (const auto& payload : out.uplink)
    ledger.record(round, Link::Uplink, payload.size(), d);

  double loss_sum = 0.0, drift_sum = 0.0;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    loss_sum += losses[i];
    drift_sum += mean_abs_distance(clients[i].reference_global, global);
  }
  const auto n = static_cast<double>(clients.size());
  out.metrics.train_loss = loss_sum / n;
  out.metrics.client_drift = drift_sum / n;
  out.metrics.bytes_down = ledger.bytes(round, Link::Downlink);
  out.metrics.bytes_up = ledger.bytes(round, Link::Uplink);
  out.metrics.cum_frac_incl = ledger.inclusive().fraction();
  out.metrics.cum_frac_excl = ledger.exclusive().fraction();
  return out;
}

// ---------------------------------------------------------------------------
// Local training and evaluation

inline snn::Network network_for(const ModelSpec& spec, const ParamVector& params) {
  snn::Network net{spec.kind, {}, spec.lif};
  for (std::size_t k = 0; k + 1 < spec.widths.size(); ++k)
    net.layers.emplace_back(Shape{spec.widths[k + 1], spec.widths[k]});
  load_params(net, params);
  return net;
}

inline ParamVector initial_params(const FlConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, Stream::Init));
  return flatten(snn::make_network(cfg.model.kind, cfg.model.widths,
                                   cfg.model.lif, rng));
}

/// E epochs of minibatch SGD over `indices`, reshuffled every epoch. Returns
/// the mean per-sample loss over all epochs.
inline double train_local(snn::Network& net, const data::Dataset& ds,
                          std::span<const std::size_t> indices,
                          const FlConfig& cfg, snn::GradAccumulator& momentum,
                          Rng& shuffle_rng, Rng& encode_rng) {
  if (momentum.layers.size() != net.depth())
    momentum = snn::GradAccumulator::zeros_like(net);
  std::vector<std::size_t> order(indices.begin(), indices.end());
  double loss_sum = 0.0;
  std::size_t seen = 0;
  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Tensor x = ds.gather(idx);
      const std::vector<int> y = ds.gather_labels(idx);
      snn::TrainStep step =
          net.kind == snn::ModelKind::Snn
              ? snn::snn_forward_backward(
                    net, snn::rate_encode(x, net.lif.timesteps, encode_rng), y)
              : snn::ann_forward_backward(net, x, y);
      snn::sgd_step(net, step.grads, cfg.optimizer, momentum);
      loss_sum += step.loss * static_cast<double>(idx.size());
      seen += idx.size();
    }
  }
  return seen == 0 ? 0.0 : loss_sum / static_cast<double>(seen);
}

inline std::uint64_t shuffle_seed(std::uint64_t master, std::size_t client,
                                  std::uint32_t round) {
  return derive_seed(master, Stream::Shuffle, client, round);
}

inline std::uint64_t encode_seed(std::uint64_t master, std::size_t client,
                                 std::uint32_t round) {
  return derive_seed(master, Stream::Encode, client, round);
}

/// The trainer run_training uses: local SGD on the client's own partition,
/// with shuffling and spike encoding drawn from per-(client, round) streams.
inline LocalTrainer make_local_trainer(const FlConfig& cfg,
                                       const data::Dataset& train) {
  return [&cfg, &train](ClientState& client, std::uint32_t round) {
    snn::Network net = network_for(cfg.model, client.local_model);
    Rng shuffle_rng(shuffle_seed(cfg.seed, client.id, round));
    Rng encode_rng(encode_seed(cfg.seed, client.id, round));
    const double loss = train_local(net, train, client.indices, cfg,
                                    client.momentum, shuffle_rng, encode_rng);
    client.local_model = flatten(net);
    return loss;
  };
}

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Test loss/accuracy. SNN inputs are encoded from a fixed stream so that
/// successive rounds are scored on the same spike trains.
inline Evaluation evaluate(const snn::Network& net, const data::Dataset& test,
                           const FlConfig& cfg) {
  Evaluation ev;
  if (test.size() == 0) return ev;
  Rng encode_rng(derive_seed(cfg.seed, Stream::Eval));
  std::vector<std::size_t> idx;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < test.size(); start += cfg.eval_batch) {
    const std::size_t stop = std::min(test.size(), start + cfg.eval_batch);
    idx.resize(stop - start);
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = start + k;
    const Tensor x = test.gather(idx);
    const Tensor logits =
        net.kind == snn::ModelKind::Snn
            ? snn::infer(net, snn::rate_encode(x, net.lif.timesteps, encode_rng))
            : snn::ann_logits(net, x);
    const auto y = test.gather_labels(idx);
    const auto loss = snn::cross_entropy_loss(logits, y);
    loss_sum += loss.loss * static_cast<double>(idx.size());
    correct += loss.correct;
  }
  ev.loss = loss_sum / static_cast<double>(test.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  return ev;
}

struct TrainingResult {
  std::vector<RoundMetrics> metrics;
  ParamVector final_model;
  std::size_t dropped_samples = 0;
};

using RoundCallback = std::function<void(const RoundMetrics&)>;

/// Full FLTS / FLDR run: initialise W_0, split the training data evenly, then
/// for r = 1..R run a round with the current kappa, score the new global model
/// on `test`, and advance kappa along the schedule.
inline TrainingResult run_training(const FlConfig& cfg,
                                   const data::Dataset& train,
                                   const data::Dataset& test,
                                   const RoundCallback& on_round = {}) {
  cfg.validate();
  if (train.features() != cfg.model.widths.front())
    throw ConfigError("model.layers: input width " +
                      std::to_string(cfg.model.widths.front()) +
                      " does not match data features " +
                      std::to_string(train.features()));
  if (static_cast<std::size_t>(train.class_count) > cfg.model.widths.back())
    throw ConfigError("model.layers: output width " +
                      std::to_string(cfg.model.widths.back()) + " < " +
                      std::to_string(train.class_count) + " classes");

  Rng partition_rng(derive_seed(cfg.seed, Stream::Partition));
  const data::Partition part = data::partition_iid(train, cfg.num_clients,
                                                   partition_rng);
  std::vector<ClientState> clients(cfg.num_clients);
  for (std::size_t c = 0; c < clients.size(); ++c) {
    clients[c].id = c;
    clients[c].indices = part.clients[c];
  }

  const Protocol protocol{cfg.channel, cfg.rounding, cfg.dense_first_broadcast,
                          cfg.seed, cfg.workers};
  const LocalTrainer trainer = make_local_trainer(cfg, train);
  compression::BandwidthLedger ledger;

  TrainingResult result;
  result.dropped_samples = part.dropped;
  ParamVector global = initial_params(cfg);
  ParamVector prev_global = global;
  double kappa = cfg.compression.initial();
  for (int r = 1; r <= cfg.rounds; ++r) {
    const auto round = static_cast<std::uint32_t>(r);
    RoundResult rr = run_round(round, global, prev_global, clients, kappa,
                               protocol, trainer, ledger);
    const Evaluation ev = evaluate(network_for(cfg.model, rr.global), test, cfg);
    rr.metrics.test_loss = ev.loss;
    rr.metrics.test_acc = ev.accuracy;
    prev_global = std::move(global);
    global = std::move(rr.global);
    result.metrics.push_back(rr.metrics);
    if (on_round) on_round(rr.metrics);
    kappa = cfg.compression.next(kappa);
  }
  result.final_model = std::move(global);
  return result;
}

}  // namespace spikefl::fl

#endif  // SPIKEFL_FL_ENGINE_HPP
