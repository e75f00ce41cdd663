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
#include <numeric>

#include "checks.hpp"
#include "oracles.hpp"
#include "spikefl/spikefl.hpp"

using namespace spikefl;
using namespace spikefl::snn;

TEST(Lif, MembraneUpdateByHand) {
  LifConfig cfg;  // beta 0.95, threshold 1
  EXPECT_DOUBLE_EQ(membrane_update(0.5, 1.0, 1.0, cfg), 0.5 + 0.95 - 1.0);
  EXPECT_DOUBLE_EQ(membrane_update(0.5, 1.0, 0.0, cfg), 1.45);
}

TEST(Lif, ThresholdIsStrict) {
  LifConfig cfg;
  EXPECT_EQ(spike(1.0, cfg, SpikeMode::Spiking), 0.0);
  EXPECT_EQ(spike(std::nextafter(1.0, 2.0), cfg, SpikeMode::Spiking), 1.0);
}

TEST(Lif, SurrogateTriangle) {
  LifConfig cfg;
  cfg.threshold = 2.0;
  cfg.xi = 0.3;
  EXPECT_DOUBLE_EQ(surrogate_grad(2.0, cfg), 0.3);
  EXPECT_DOUBLE_EQ(surrogate_grad(1.0, cfg), 0.15);
  EXPECT_DOUBLE_EQ(surrogate_grad(3.0, cfg), 0.15);
  EXPECT_EQ(surrogate_grad(0.0, cfg), 0.0);
  EXPECT_EQ(surrogate_grad(4.0, cfg), 0.0);
  EXPECT_EQ(surrogate_grad(-3.0, cfg), 0.0);
}

TEST(Lif, SmoothSpikeDerivativeIsSurrogate) {
  LifConfig cfg;
  cfg.threshold = 0.8;
  cfg.xi = 0.7;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double u = rng.uniform(-1.0, 2.5);
    const double h = 1e-6;
    const double fd = (smooth_spike(u + h, cfg) - smooth_spike(u - h, cfg)) / (2 * h);
    EXPECT_NEAR(fd, surrogate_grad(u, cfg), 1e-6) << "u=" << u;
  }
  EXPECT_DOUBLE_EQ(smooth_spike(5.0, cfg), cfg.xi * cfg.threshold);
}

TEST(Lif, StepMatchesScalarNeuron) {
  LifConfig cfg;
  cfg.beta = 0.8;
  cfg.threshold = 1.0;
  Rng rng(11);
  std::vector<double> current(40);
  for (double& c : current) c = rng.uniform(-0.2, 0.9);
  const auto expect = oracle::lif_neuron(current, cfg.beta, cfg.threshold);
  auto state = LifLayerState::zeros(1);
  for (std::size_t t = 0; t < current.size(); ++t) {
    auto r = lif_step(state, Tensor({1}, std::vector<double>{current[t]}), cfg);
    EXPECT_EQ(r.spikes[0], expect[t]) << "t=" << t;
    state = r.state;
  }
}

TEST(Lif, NonLeakyIntegrates) {
  LifConfig cfg;
  cfg.beta = 1.0;
  cfg.threshold = 10.0;
  auto state = LifLayerState::zeros(1);
  for (int t = 0; t < 5; ++t) state = lif_step(state, Tensor({1}, 1.5), cfg).state;
  EXPECT_DOUBLE_EQ(state.membrane[0], 7.5);
}

TEST(Lif, StepRejectsBadInput) {
  LifConfig cfg;
  auto state = LifLayerState::zeros(2);
  EXPECT_THROW(lif_step(state, Tensor({3}), cfg), StructuralError);
  EXPECT_THROW(lif_step(state, Tensor({2}, NAN), cfg), NumericError);
  cfg.beta = 1.5;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(Encoding, RateMatchesIntensity) {
  Rng rng(3);
  Tensor x({1, 3}, std::vector<double>{0.0, 0.3, 1.0});
  const auto s = rate_encode(x, 20000, rng);
  double sums[3] = {0, 0, 0};
  for (std::size_t t = 0; t < s.timesteps(); ++t)
    for (int f = 0; f < 3; ++f) sums[f] += s.frame(t, 0)[static_cast<std::size_t>(f)];
  EXPECT_EQ(sums[0], 0.0);
  EXPECT_EQ(sums[2], 20000.0);
  // 5 sigma of a binomial(20000, 0.3) proportion
  EXPECT_NEAR(sums[1] / 20000.0, 0.3, 5 * std::sqrt(0.21 / 20000));
}

TEST(Encoding, RejectsOutOfRange) {
  Rng rng(1);
  EXPECT_THROW(rate_encode(Tensor({1, 2}, std::vector<double>{0.5, 1.2}), 3, rng),
               InputError);
  EXPECT_THROW(rate_encode(Tensor({1, 2}, 0.5), 0, rng), InputError);
}

TEST(Encoding, SeedDeterminesSpikes) {
  Tensor x({2, 4}, 0.5);
  Rng a(9), b(9);
  EXPECT_EQ(rate_encode(x, 6, a).spikes, rate_encode(x, 6, b).spikes);
}

TEST(Network, ReadoutIntegratesWithoutLeak) {
  // A single readout layer sums W x_t over time.
  Network net{ModelKind::Snn, {Tensor({2, 2}, std::vector<double>{1, 2, 3, 4})}, {}};
  net.lif.timesteps = 3;
  Tensor spikes({3, 1, 2}, std::vector<double>{1, 0, 1, 1, 0, 1});
  const auto logits = infer(net, SpikeBatch(spikes));
  EXPECT_DOUBLE_EQ(logits.at(0, 0), 1 + 3 + 2);
  EXPECT_DOUBLE_EQ(logits.at(0, 1), 3 + 7 + 4);
}

TEST(Network, HiddenNeuronMatchesScalarOracle) {
  // 1 input -> 1 hidden LIF neuron -> 1 readout with weight 1: logits count
  // the hidden spikes.
  LifConfig lif;
  lif.beta = 0.9;
  Network net{ModelKind::Snn,
              {Tensor({1, 1}, std::vector<double>{0.45}), Tensor({1, 1}, 1.0)}, lif};
  Rng rng(4);
  const std::size_t T = 50;
  Tensor in({T, 1, 1});
  std::vector<double> current(T);
  for (std::size_t t = 0; t < T; ++t) {
    in[t] = rng.bernoulli(0.6) ? 1.0 : 0.0;
    current[t] = 0.45 * in[t];
  }
  const auto expect = oracle::lif_neuron(current, lif.beta, lif.threshold);
  const auto logits = infer(net, SpikeBatch(in));
  EXPECT_DOUBLE_EQ(logits[0], std::accumulate(expect.begin(), expect.end(), 0.0));
}

TEST(Network, GlorotBounds) {
  Rng rng(8);
  const std::vector<std::size_t> widths{30, 20, 10};
  auto net = make_network(ModelKind::Snn, widths, {}, rng);
  ASSERT_EQ(net.param_count(), 30u * 20 + 20 * 10);
  for (std::size_t l = 0; l < 2; ++l) {
    const double lim = std::sqrt(6.0 / static_cast<double>(widths[l] + widths[l + 1]));
    for (double v : net.layers[l].data) EXPECT_LE(std::abs(v), lim);
  }
}

TEST(Network, RejectsWrongInputWidth) {
  Rng rng(1);
  const std::vector<std::size_t> widths{4, 3};
  auto net = make_network(ModelKind::Snn, widths, {}, rng);
  EXPECT_THROW(infer(net, SpikeBatch(Tensor({2, 1, 5}))), StructuralError);
}

TEST(Loss, UniformLogits) {
  Tensor logits({2, 4}, 0.0);
  const std::vector<int> y{1, 3};
  const auto r = cross_entropy_loss(logits, y);
  EXPECT_NEAR(r.loss, std::log(4.0), 1e-15);
  EXPECT_DOUBLE_EQ(r.grad.at(0, 0), 0.25 / 2);
  EXPECT_DOUBLE_EQ(r.grad.at(0, 1), (0.25 - 1) / 2);
  EXPECT_EQ(r.correct, 0u);  // ties go to class 0
}

TEST(Loss, ArgmaxTiesGoLow) {
  const std::vector<double> row{1, 3, 3, 2};
  EXPECT_EQ(argmax(row), 1u);
}

TEST(Loss, RejectsBadLabel) {
  const std::vector<int> y{5};
  EXPECT_THROW(cross_entropy_loss(Tensor({1, 3}), y), InputError);
}

TEST(Sgd, StepByHand) {
  std::vector<double> p{1.0}, g{0.5}, buf{0.2};
  sgd_step(p, g, {0.1, 0.9, 0.1}, buf);
  EXPECT_DOUBLE_EQ(buf[0], 0.9 * 0.2 + 0.5 + 0.1 * 1.0);
  EXPECT_DOUBLE_EQ(p[0], 1.0 - 0.1 * buf[0]);
}

TEST(Sgd, RejectsBadConfig) {
  EXPECT_THROW((SgdConfig{0.0, 0.9, 0.0}.validate()), InputError);
  EXPECT_THROW((SgdConfig{0.1, 1.0, 0.0}.validate()), InputError);
}

TEST(Gradient, SmoothBpttMatchesFiniteDifferences) {
  Rng rng(derive_seed(100, Stream::Test));
  for (int trial = 0; trial < 10; ++trial) {
    const auto r = checks::snn_gradient_check(rng);
    EXPECT_LE(r.worst_rel, 1e-4) << "trial " << trial << ", " << r.where;
    EXPECT_LE(r.forward_rel, 1e-9) << "trial " << trial;
  }
}

TEST(Gradient, AnnBackpropMatchesFiniteDifferences) {
  Rng rng(derive_seed(101, Stream::Test));
  for (int trial = 0; trial < 10; ++trial) {
    const auto r = checks::ann_gradient_check(rng);
    EXPECT_LE(r.worst_rel, 1e-6) << "trial " << trial << ", " << r.where;
    EXPECT_LE(r.forward_rel, 1e-12) << "trial " << trial;
  }
}

TEST(Gradient, SpikingModeUsesSameBackward) {
  // With no hidden layer the spike function never enters, so both modes agree.
  Rng rng(2);
  Network net{ModelKind::Snn, {Tensor({3, 4})}, {}};
  for (double& v : net.layers[0].data) v = rng.normal();
  Tensor rates({2, 4}, 0.5);
  const auto spikes = rate_encode(rates, 4, rng);
  const std::vector<int> y{0, 2};
  EXPECT_EQ(snn_forward_backward(net, spikes, y, SpikeMode::Spiking).grads.layers[0],
            snn_forward_backward(net, spikes, y, SpikeMode::Smooth).grads.layers[0]);
}

TEST(Lif, HandComputedSteps) {
  LifConfig cfg;
  cfg.beta = 0.5;
  auto one = [&](double u_prev, double s_prev, double input) {
    LifLayerState st{Tensor({1}, u_prev), Tensor({1}, s_prev)};
    return lif_step(st, Tensor({1}, input), cfg);
  };
  auto a = one(0.4, 0, 0.9);
  EXPECT_DOUBLE_EQ(a.state.membrane[0], 1.1);
  EXPECT_EQ(a.spikes[0], 1.0);
  auto b = one(1.1, 1, 0.0);
  EXPECT_DOUBLE_EQ(b.state.membrane[0], 0.55 - 1.0);
  EXPECT_EQ(b.spikes[0], 0.0);
  cfg.beta = 1.0;
  auto c = one(0.3, 0, 0.0);
  EXPECT_DOUBLE_EQ(c.state.membrane[0], 0.3);
  EXPECT_EQ(c.spikes[0], 0.0);
}

TEST(Network, ZeroAndSubthresholdGiveZeroLogits) {
  Network zero{ModelKind::Snn, {Tensor({1, 3}), Tensor({2, 1}, 1.0)}, {}};
  Tensor ones({4, 2, 3}, 1.0);
  for (double v : infer(zero, SpikeBatch(ones)).data) EXPECT_EQ(v, 0.0);
  Network sub{ModelKind::Snn, {Tensor({2, 3}, 0.3), Tensor({2, 2}, 1.0)}, {}};
  for (double v : infer(sub, SpikeBatch(Tensor({1, 1, 3}, 1.0))).data) EXPECT_EQ(v, 0.0);
}

TEST(Network, TwoStepTraceByHand) {
  // in -(w1=1.2)-> LIF(beta 0.5, thr 1) -(w2=2)-> readout, input spikes 1, 1.
  // t0: U = 1.2 -> spike, logit += 2.  t1: U = 1.2 + 0.6 - 1 = 0.8 -> none.
  LifConfig lif;
  lif.beta = 0.5;
  Network net{ModelKind::Snn, {Tensor({1, 1}, 1.2), Tensor({1, 1}, 2.0)}, lif};
  const auto r = forward(net, SpikeBatch(Tensor({2, 1, 1}, 1.0)));
  EXPECT_DOUBLE_EQ(r.logits[0], 2.0);
  ASSERT_EQ(r.trace.membranes[0].size(), 2u);
  EXPECT_DOUBLE_EQ(r.trace.membranes[0][0], 1.2);
  EXPECT_DOUBLE_EQ(r.trace.membranes[0][1], 0.8);
}

TEST(Gradient, ZeroInputGivesZeroGradient) {
  Rng rng(12);
  const std::vector<std::size_t> widths{5, 4, 3};
  auto net = make_network(ModelKind::Snn, widths, {}, rng);
  const std::vector<int> y{1, 2};
  const auto step = snn_forward_backward(net, SpikeBatch(Tensor({3, 2, 5})), y);
  for (const auto& g : step.grads.layers)
    for (double v : g.data) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, DuplicatedSampleDoublesGradient) {
  Rng rng(13);
  const std::vector<std::size_t> widths{6, 5, 3};
  auto net = make_network(ModelKind::Snn, widths, {}, rng);
  const auto single = rate_encode(Tensor({1, 6}, 0.7), 4, rng);
  Tensor twice({4, 2, 6});
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t f = 0; f < 6; ++f) twice[(t * 2 + b) * 6 + f] = single.frame(t, 0)[f];
  auto fwd1 = forward(net, single);
  auto fwd2 = forward(net, SpikeBatch(twice));
  // Same per-sample logit gradient for both batches.
  Tensor g1({1, 3}, std::vector<double>{0.2, -0.5, 0.3});
  Tensor g2({2, 3}, std::vector<double>{0.2, -0.5, 0.3, 0.2, -0.5, 0.3});
  const auto a = backward(net, fwd1.trace, g1), b = backward(net, fwd2.trace, g2);
  for (std::size_t l = 0; l < a.layers.size(); ++l)
    for (std::size_t i = 0; i < a.layers[l].size(); ++i)
      EXPECT_DOUBLE_EQ(b.layers[l][i], 2 * a.layers[l][i]);
}

TEST(Loss, DominantLogitApproachesZero) {
  Tensor logits({1, 3}, std::vector<double>{0, 60, 0});
  const std::vector<int> y{1};
  EXPECT_LT(cross_entropy_loss(logits, y).loss, 1e-20);
}

TEST(Sgd, HandComputedSteps) {
  std::vector<double> p{3.0}, g{0.5}, buf{0.0};
  sgd_step(p, g, {1.0, 0.0, 0.0}, buf);
  EXPECT_DOUBLE_EQ(p[0], 2.5);

  std::vector<double> q{1.0}, zero{0.0}, zbuf{0.0};
  sgd_step(q, zero, {0.1, 0.95, 0.0}, zbuf);
  EXPECT_EQ(q[0], 1.0);

  std::vector<double> r{0.0}, rg{0.25}, rbuf{0.0};
  sgd_step(r, rg, {1.0, 0.95, 0.0}, rbuf);
  sgd_step(r, rg, {1.0, 0.95, 0.0}, rbuf);
  EXPECT_DOUBLE_EQ(r[0], -(1 + 1.95) * 0.25);
}

TEST(Ann, ZeroWeightsGiveUniformLoss) {
  Network net{ModelKind::Ann, {Tensor({4, 3}), Tensor({5, 4})}, {}};
  const std::vector<int> y{0, 4};
  const auto step = ann_forward_backward(net, Tensor({2, 3}, 0.5), y);
  EXPECT_NEAR(step.loss, std::log(5.0), 1e-15);
}
