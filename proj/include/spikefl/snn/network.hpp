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

#ifndef SPIKEFL_SNN_NETWORK_HPP
#define SPIKEFL_SNN_NETWORK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spikefl/errors.hpp"
#include "spikefl/random.hpp"
#include "spikefl/snn/encoding.hpp"
#include "spikefl/snn/lif.hpp"
#include "spikefl/tensor.hpp"

namespace spikefl::snn {

enum class ModelKind { Snn, Ann };

inline const char* to_string(ModelKind kind) {
  return kind == ModelKind::Snn ? "snn" : "ann";
}

/// Stack of bias-free dense layers, each weight matrix laid out [out, in].
///
/// SNN: every layer but the last is a LIF layer; the last is a non-leaking,
/// non-spiking integrator whose membrane at the final timestep is the logit
/// vector. ANN: ReLU between layers, linear logits.
struct Network {
  ModelKind kind = ModelKind::Snn;
  std::vector<Tensor> layers;
  LifConfig lif;

  std::size_t depth() const noexcept { return layers.size(); }
  std::size_t in_width() const { return layers.front().dim(1); }
  std::size_t out_width() const { return layers.back().dim(0); }

  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w;
    if (layers.empty()) return w;
    w.push_back(in_width());
    for (const auto& layer : layers) w.push_back(layer.dim(0));
    return w;
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.size();
    return n;
  }

  void validate() const {
    if (layers.empty()) throw StructuralError("network has no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      if (layers[k].rank() != 2)
        throw StructuralError("layer " + std::to_string(k) + " is not rank 2");
      if (k > 0 && layers[k].dim(1) != layers[k - 1].dim(0))
        throw StructuralError("layer " + std::to_string(k) + " expects " +
                              std::to_string(layers[k].dim(1)) +
                              " inputs but layer " + std::to_string(k - 1) +
                              " emits " + std::to_string(layers[k - 1].dim(0)));
    }
    if (kind == ModelKind::Snn) lif.validate();
  }
};

/// Glorot-uniform weights in +-sqrt(6 / (in + out)).
inline Network make_network(ModelKind kind, std::span<const std::size_t> widths,
                            const LifConfig& lif, Rng& rng) {
  if (widths.size() < 2)
    throw StructuralError("a network needs at least input and output widths");
  Network net{kind, {}, lif};
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const std::size_t in = widths[k], out = widths[k + 1];
    if (in == 0 || out == 0) throw StructuralError("zero layer width");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Tensor w({out, in});
    for (double& v : w.data) v = rng.uniform(-limit, limit);
    net.layers.push_back(std::move(w));
  }
  net.validate();
  return net;
}

/// Per-layer tensors congruent with Network::layers. Used both for gradients
/// and for momentum buffers.
struct GradAccumulator {
  std::vector<Tensor> layers;

  static GradAccumulator zeros_like(const Network& net) {
    GradAccumulator g;
    for (const auto& layer : net.layers) g.layers.emplace_back(layer.shape);
    return g;
  }

  bool operator==(const GradAccumulator&) const = default;
};

// ---------------------------------------------------------------------------
// Dense kernels. Input rows are scanned once for non-zero entries, which makes
// the binary spike inputs of the SNN cheap.

namespace detail {

struct ActiveInputs {
  std::vector<std::size_t> index;
  std::vector<double> value;

  void gather(std::span<const double> x) {
    index.clear();
    value.clear();
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] != 0.0) {
        index.push_back(i);
        value.push_back(x[i]);
      }
  }
};

// y = W x
inline void matvec(const Tensor& w, const ActiveInputs& x, std::span<double> y) {
  const std::size_t in = w.dim(1);
  for (std::size_t o = 0; o < y.size(); ++o) {
    const double* row = w.data.data() + o * in;
    double acc = 0.0;
    for (std::size_t k = 0; k < x.index.size(); ++k)
      acc += row[x.index[k]] * x.value[k];
    y[o] = acc;
  }
}

// dW += dy x^T
inline void outer_add(Tensor& dw, std::span<const double> dy,
                      const ActiveInputs& x) {
  const std::size_t in = dw.dim(1);
  for (std::size_t o = 0; o < dy.size(); ++o) {
    const double g = dy[o];
    if (g == 0.0) continue;
    double* row = dw.data.data() + o * in;
    for (std::size_t k = 0; k < x.index.size(); ++k)
      row[x.index[k]] += g * x.value[k];
  }
}

// dx += W^T dy
inline void matvec_transposed_add(const Tensor& w, std::span<const double> dy,
                                  std::span<double> dx) {
  const std::size_t in = w.dim(1);
  for (std::size_t o = 0; o < dy.size(); ++o) {
    const double g = dy[o];
    if (g == 0.0) continue;
    const double* row = w.data.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) dx[i] += g * row[i];
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SNN forward / BPTT

/// Everything backward() needs from a forward pass.
///
/// inputs[l] holds the activity entering layer l for every timestep, laid out
/// [T][batch][in_l]; inputs[0] is the encoded input. membranes[l] holds the
/// membrane potential of hidden layer l, laid out [T][batch][out_l].
struct SnnTrace {
  SpikeMode mode = SpikeMode::Spiking;
  std::size_t batch = 0;
  std::size_t timesteps = 0;
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> membranes;
};

struct ForwardResult {
  Tensor logits;  // [batch, classes]
  SnnTrace trace;
};

namespace detail {

inline Tensor snn_forward(const Network& net, const SpikeBatch& in,
                          SpikeMode mode, SnnTrace* trace) {
  if (net.kind != ModelKind::Snn)
    throw StructuralError("SNN forward called on an ANN");
  net.validate();
  if (in.features() != net.in_width())
    throw StructuralError("input width " + std::to_string(in.features()) +
                          " does not match first layer width " +
                          std::to_string(net.in_width()));
  const std::size_t steps = in.timesteps(), batch = in.batch();
  const std::size_t depth = net.depth();
  const auto& cfg = net.lif;

  std::vector<std::vector<double>> membrane(depth - 1), spikes(depth - 1);
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    membrane[l].assign(batch * net.layers[l].dim(0), 0.0);
    spikes[l].assign(batch * net.layers[l].dim(0), 0.0);
  }
  if (trace) {
    trace->mode = mode;
    trace->batch = batch;
    trace->timesteps = steps;
    trace->inputs.assign(depth, {});
    trace->membranes.assign(depth - 1, {});
    trace->inputs[0] = in.spikes.data;
    for (std::size_t l = 1; l < depth; ++l)
      trace->inputs[l].reserve(steps * batch * net.layers[l].dim(1));
    for (std::size_t l = 0; l + 1 < depth; ++l)
      trace->membranes[l].reserve(steps * batch * net.layers[l].dim(0));
  }

  Tensor logits({batch, net.out_width()});
  ActiveInputs active;
  std::vector<double> drive;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      std::span<const double> x = in.frame(t, b);
      for (std::size_t l = 0; l < depth; ++l) {
        const Tensor& w = net.layers[l];
        const std::size_t out = w.dim(0);
        active.gather(x);
        drive.assign(out, 0.0);
        matvec(w, active, drive);
        if (l + 1 == depth) {
          auto row = logits.row(b);
          for (std::size_t o = 0; o < out; ++o) row[o] += drive[o];
          break;
        }
        double* u = membrane[l].data() + b * out;
        double* s = spikes[l].data() + b * out;
        for (std::size_t o = 0; o < out; ++o) {
          u[o] = membrane_update(drive[o], u[o], s[o], cfg);
          s[o] = spike(u[o], cfg, mode);
        }
        x = std::span<const double>(s, out);
      }
    }
    if (trace) {
      // Layout [T][batch][width]: append the whole batch for this timestep.
      for (std::size_t l = 0; l + 1 < depth; ++l) {
        trace->membranes[l].insert(trace->membranes[l].end(),
                                   membrane[l].begin(), membrane[l].end());
        trace->inputs[l + 1].insert(trace->inputs[l + 1].end(),
                                    spikes[l].begin(), spikes[l].end());
      }
    }
  }
  require_finite(logits.data, "snn forward logits");
  return logits;
}

}  // namespace detail

/// Simulates the network for every timestep of `in` and records the trace.
inline ForwardResult forward(const Network& net, const SpikeBatch& in,
                             SpikeMode mode = SpikeMode::Spiking) {
  ForwardResult r;
  r.logits = detail::snn_forward(net, in, mode, &r.trace);
  return r;
}

/// Forward pass without recording a trace.
inline Tensor infer(const Network& net, const SpikeBatch& in,
                    SpikeMode mode = SpikeMode::Spiking) {
  return detail::snn_forward(net, in, mode, nullptr);
}

/// Backpropagation through time. loss_grad is d(loss)/d(logits), [batch,
/// classes]. Gradients are summed over the batch and over all timesteps;
/// d(spike)/d(membrane) is always the surrogate, in both spike modes, and the
/// recurrence flows through the leak and the subtractive reset.
inline GradAccumulator backward(const Network& net, const SnnTrace& trace,
                                const Tensor& loss_grad) {
  net.validate();
  const std::size_t depth = net.depth();
  const std::size_t steps = trace.timesteps, batch = trace.batch;
  if (trace.inputs.size() != depth || trace.membranes.size() + 1 != depth)
    throw StructuralError("trace depth does not match network");
  for (std::size_t l = 0; l < depth; ++l)
    if (trace.inputs[l].size() != steps * batch * net.layers[l].dim(1))
      throw StructuralError("trace input size mismatch at layer " +
                            std::to_string(l));
  if (loss_grad.shape != Shape{batch, net.out_width()})
    throw StructuralError("loss gradient shape " +
                          shape_string(loss_grad.shape) + " does not match " +
                          shape_string({batch, net.out_width()}));

  const auto& cfg = net.lif;
  GradAccumulator grads = GradAccumulator::zeros_like(net);
  detail::ActiveInputs active;

  auto input_frame = [&](std::size_t l, std::size_t t, std::size_t b) {
    const std::size_t in = net.layers[l].dim(1);
    return std::span<const double>(
        trace.inputs[l].data() + (t * batch + b) * in, in);
  };

  // Readout integrates every timestep with unit weight, so its drive gradient
  // is loss_grad at every t.
  const std::size_t top = depth - 1;
  std::vector<double> upstream;  // d(loss)/d(activity leaving layer l), [T][B][out_l]
  {
    const Tensor& w = net.layers[top];
    const std::size_t in = w.dim(1);
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t b = 0; b < batch; ++b) {
        active.gather(input_frame(top, t, b));
        detail::outer_add(grads.layers[top], loss_grad.row(b), active);
      }
    if (top > 0) {
      std::vector<double> per_sample(batch * in, 0.0);
      for (std::size_t b = 0; b < batch; ++b)
        detail::matvec_transposed_add(
            w, loss_grad.row(b),
            std::span<double>(per_sample.data() + b * in, in));
      upstream.resize(steps * batch * in);
      for (std::size_t t = 0; t < steps; ++t)
        std::copy(per_sample.begin(), per_sample.end(),
                  upstream.begin() + static_cast<std::ptrdiff_t>(t * batch * in));
    }
  }

  for (std::size_t l = top; l-- > 0;) {
    const Tensor& w = net.layers[l];
    const std::size_t out = w.dim(0), in = w.dim(1);
    const std::vector<double>& mem = trace.membranes[l];
    std::vector<double> downstream;
    if (l > 0) downstream.assign(steps * batch * in, 0.0);

    std::vector<double> du_next(out), du(out);
    for (std::size_t b = 0; b < batch; ++b) {
      std::fill(du_next.begin(), du_next.end(), 0.0);
      for (std::size_t t = steps; t-- > 0;) {
        const std::size_t off = (t * batch + b) * out;
        for (std::size_t o = 0; o < out; ++o) {
          // S^t feeds the next layer and the reset of U^{t+1}.
          const double ds = upstream[off + o] - cfg.threshold * du_next[o];
          du[o] = ds * surrogate_grad(mem[off + o], cfg) + cfg.beta * du_next[o];
        }
        active.gather(input_frame(l, t, b));
        detail::outer_add(grads.layers[l], du, active);
        if (l > 0)
          detail::matvec_transposed_add(
              w, du,
              std::span<double>(downstream.data() + (t * batch + b) * in, in));
        std::swap(du, du_next);
      }
    }
    upstream = std::move(downstream);
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Loss

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d(loss)/d(logits)
  std::size_t correct = 0;
};

/// Lowest index wins ties.
inline std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(
      std::max_element(row.begin(), row.end()) - row.begin());
}

/// Softmax cross-entropy averaged over the batch.
inline LossResult cross_entropy_loss(const Tensor& logits,
                                     std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size())
    throw StructuralError("logits " + shape_string(logits.shape) +
                          " do not match " + std::to_string(labels.size()) +
                          " labels");
  require_finite(logits.data, "cross_entropy logits");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  LossResult r{0.0, Tensor(logits.shape), 0};
  if (batch == 0) return r;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || static_cast<std::size_t>(label) >= classes)
      throw InputError("label " + std::to_string(label) + " outside [0, " +
                       std::to_string(classes) + ")");
    auto row = logits.row(b);
    const double peak = *std::max_element(row.begin(), row.end());
    double denom = 0.0;
    for (double z : row) denom += std::exp(z - peak);
    const double log_denom = std::log(denom);
    r.loss += (log_denom - (row[label] - peak)) * inv_batch;
    auto g = r.grad.row(b);
    for (std::size_t c = 0; c < classes; ++c)
      g[c] = std::exp(row[c] - peak - log_denom) * inv_batch;
    g[label] -= inv_batch;
    if (argmax(row) == static_cast<std::size_t>(label)) ++r.correct;
  }
  return r;
}

struct TrainStep {
  double loss = 0.0;
  double accuracy = 0.0;
  GradAccumulator grads;
};

inline TrainStep snn_forward_backward(const Network& net,
                                      const SpikeBatch& spikes,
                                      std::span<const int> labels,
                                      SpikeMode mode = SpikeMode::Spiking) {
  auto fwd = forward(net, spikes, mode);
  auto loss = cross_entropy_loss(fwd.logits, labels);
  TrainStep step;
  step.loss = loss.loss;
  step.accuracy = labels.empty() ? 0.0
                                 : static_cast<double>(loss.correct) /
                                       static_cast<double>(labels.size());
  step.grads = backward(net, fwd.trace, loss.grad);
  return step;
}

// ---------------------------------------------------------------------------
// ANN

namespace detail {

// pre[l] is the pre-activation of layer l; post[l] the input to layer l.
struct AnnTrace {
  std::vector<Tensor> post;
  std::vector<Tensor> pre;
};

inline Tensor ann_forward(const Network& net, const Tensor& batch,
                          AnnTrace* trace) {
  if (net.kind != ModelKind::Ann)
    throw StructuralError("ANN forward called on an SNN");
  net.validate();
  if (batch.rank() != 2 || batch.dim(1) != net.in_width())
    throw StructuralError("input " + shape_string(batch.shape) +
                          " does not match first layer width " +
                          std::to_string(net.in_width()));
  const std::size_t n = batch.dim(0);
  Tensor x = batch;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const Tensor& w = net.layers[l];
    const std::size_t out = w.dim(0), in = w.dim(1);
    Tensor z({n, out});
    for (std::size_t b = 0; b < n; ++b) {
      const double* xr = x.data.data() + b * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double* wr = w.data.data() + o * in;
        double acc = 0.0;
        for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xr[i];
        z.at(b, o) = acc;
      }
    }
    if (trace) trace->post.push_back(std::move(x));
    if (l + 1 == net.depth()) {
      require_finite(z.data, "ann forward logits");
      return z;
    }
    Tensor a = z;
    for (double& v : a.data) v = std::max(v, 0.0);
    if (trace) trace->pre.push_back(std::move(z));
    x = std::move(a);
  }
  return x;  // unreachable
}

}  // namespace detail

inline Tensor ann_logits(const Network& net, const Tensor& batch) {
  return detail::ann_forward(net, batch, nullptr);
}

/// Dense/ReLU forward, softmax cross-entropy, exact backprop.
inline TrainStep ann_forward_backward(const Network& net, const Tensor& batch,
                                      std::span<const int> labels) {
  detail::AnnTrace trace;
  Tensor logits = detail::ann_forward(net, batch, &trace);
  auto loss = cross_entropy_loss(logits, labels);
  TrainStep step;
  step.loss = loss.loss;
  step.accuracy = labels.empty() ? 0.0
                                 : static_cast<double>(loss.correct) /
                                       static_cast<double>(labels.size());
  step.grads = GradAccumulator::zeros_like(net);

  const std::size_t n = batch.dim(0);
  Tensor delta = std::move(loss.grad);
  for (std::size_t l = net.depth(); l-- > 0;) {
    const Tensor& w = net.layers[l];
    const Tensor& x = trace.post[l];
    const std::size_t out = w.dim(0), in = w.dim(1);
    Tensor& dw = step.grads.layers[l];
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t o = 0; o < out; ++o) {
        const double g = delta.at(b, o);
        if (g == 0.0) continue;
        double* row = dw.data.data() + o * in;
        const double* xr = x.data.data() + b * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += g * xr[i];
      }
    if (l == 0) break;
    Tensor prev({n, in});
    for (std::size_t b = 0; b < n; ++b)
      detail::matvec_transposed_add(w, delta.row(b), prev.row(b));
    const Tensor& z = trace.pre[l - 1];
    for (std::size_t i = 0; i < prev.size(); ++i)
      if (z[i] <= 0.0) prev[i] = 0.0;
    delta = std::move(prev);
  }
  return step;
}

}  // namespace spikefl::snn

#endif  // SPIKEFL_SNN_NETWORK_HPP
