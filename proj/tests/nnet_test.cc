// Copyright 2026 The cclbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ccl/nnet.h"

#include <cmath>

#include <gtest/gtest.h>

#include "ccl/data.h"

namespace ccl {
namespace {

double TotalLoss(const Network& net, const Mat& xs, const std::vector<std::size_t>& ys) {
  const BatchForward fwd = ForwardBatch(net, xs, false);
  double total = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) total += CrossEntropy(Softmax(fwd.logits.row(i)), ys[i]);
  return total;
}

Dataset TwoClusters(std::size_t per_class, std::uint64_t seed) {
  return SynthBlobs(2, 2, per_class, 0.1, seed);
}

TrainConfig QuickConfig(std::size_t epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 16;
  cfg.lr = 0.05;
  cfg.milestones = {};
  cfg.seed = 5;
  return cfg;
}

TEST(ForwardTest, ZeroWeightsGiveBiases) {
  Network net = Network::Zeros({3, 4, 2}, Activation::kTanh);
  net.mutable_layers()[1].bias = {0.25, -1.0};
  const ForwardResult out = Forward(net, std::vector<double>{1.0, 2.0, 3.0}, false);
  EXPECT_DOUBLE_EQ(out.logits[0], 0.25);
  EXPECT_DOUBLE_EQ(out.logits[1], -1.0);
}

TEST(ForwardTest, SingleLinearLayerByHand) {
  Network net = Network::Zeros({2, 2}, Activation::kRelu);
  auto& layer = net.mutable_layers()[0];
  layer.weights = Mat(2, 2, {1.0, 2.0, -3.0, 0.5});
  layer.bias = {0.1, -0.2};
  const ForwardResult out = Forward(net, std::vector<double>{2.0, -1.0}, false);
  EXPECT_NEAR(out.logits[0], 0.1, 1e-15);
  EXPECT_NEAR(out.logits[1], -6.7, 1e-15);
}

TEST(ForwardTest, EvalModeIgnoresDropout) {
  RngStream init(1, 1);
  const Network net({4, 8, 3}, Activation::kRelu, 0.5, init);
  const Vec x = {0.3, -0.1, 0.8, 1.2};
  EXPECT_EQ(Forward(net, x, false).logits, Forward(net, x, false).logits);
  RngStream drop(2, 2);
  std::size_t changed = 0;
  const Vec eval = Forward(net, x, false).logits;
  for (int t = 0; t < 20; ++t) changed += Forward(net, x, true, &drop).logits != eval;
  EXPECT_GT(changed, 0u);
}

TEST(ForwardTest, ShapeMismatchThrows) {
  const Network net = Network::Zeros({3, 2}, Activation::kRelu);
  EXPECT_THROW(Forward(net, std::vector<double>{1.0, 2.0}, false), std::invalid_argument);
}

TEST(BackwardTest, MatchesFiniteDifferences) {
  for (Activation act : {Activation::kRelu, Activation::kTanh}) {
    RngStream init(3, 1);
    Network net({4, 8, 3}, act, 0.0, init);
    RngStream rng(4, 0);
    Mat xs(6, 4);
    for (double& v : xs.data()) v = rng.Normal();
    const std::vector<std::size_t> ys = {0, 1, 2, 1, 0, 2};
    const BatchForward fwd = ForwardBatch(net, xs, false);
    Mat grad(6, 3);
    for (std::size_t i = 0; i < 6; ++i) {
      const Vec g = LossGradLogits(LossSpec::CrossEntropy(), fwd.logits.row(i), ys[i]);
      std::copy(g.begin(), g.end(), grad.row(i).begin());
    }
    const ParamGrads analytic = BackwardBatch(net, fwd.cache, grad);
    constexpr double h = 1e-6;
    double worst = 0.0;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      const std::size_t nw = net.layers()[l].weights.data().size();
      for (std::size_t i = 0; i < nw + net.layers()[l].bias.size(); ++i) {
        auto param = [&](Network& n) -> double& {
          auto& layer = n.mutable_layers()[l];
          return i < nw ? layer.weights.data()[i] : layer.bias[i - nw];
        };
        const double keep = param(net);
        param(net) = keep + h;
        const double up = TotalLoss(net, xs, ys);
        param(net) = keep - h;
        const double down = TotalLoss(net, xs, ys);
        param(net) = keep;
        const double numeric = (up - down) / (2 * h);
        const double a = i < nw ? analytic.weights[l].data()[i] : analytic.biases[l][i - nw];
        worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-3}));
      }
    }
    EXPECT_LT(worst, 1e-5) << ActivationName(act);
  }
}

TEST(BackwardTest, ZeroUpstreamGivesZeroGradients) {
  RngStream init(3, 1);
  const Network net({4, 5, 3}, Activation::kRelu, 0.0, init);
  const BatchForward fwd = ForwardBatch(net, Mat(2, 4, 1.0), false);
  const ParamGrads g = BackwardBatch(net, fwd.cache, Mat(2, 3));
  for (const Mat& w : g.weights) {
    for (double v : w.data()) EXPECT_EQ(v, 0.0);
  }
  for (const Vec& b : g.biases) {
    for (double v : b) EXPECT_EQ(v, 0.0);
  }
}

TEST(BackwardTest, StaleCacheThrows) {
  RngStream init(3, 1);
  Network net({2, 3, 2}, Activation::kRelu, 0.0, init);
  const BatchForward fwd = ForwardBatch(net, Mat(1, 2, 1.0), false);
  net.mutable_layers()[0].bias[0] += 1.0;
  EXPECT_THROW(BackwardBatch(net, fwd.cache, Mat(1, 2, 1.0)), StaleCacheError);
}

TEST(WeightDecayTest, AddsLambdaTimesWeights) {
  RngStream init(3, 1);
  Network net({2, 3, 2}, Activation::kRelu, 0.0, init);
  net.mutable_layers()[1].bias = {0.5, -0.5};
  ParamGrads g = ParamGrads::ZerosLike(net);
  AddWeightDecay(net, 0.1, g);
  for (std::size_t l = 0; l < 2; ++l) {
    const auto w = net.layers()[l].weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_DOUBLE_EQ(g.weights[l].data()[i], 0.1 * w[i]);
  }
  EXPECT_DOUBLE_EQ(g.biases[1][0], 0.05);
}

TEST(SgdTest, MomentumRecursion) {
  Network net = Network::Zeros({1, 1}, Activation::kRelu);
  SgdMomentum opt(net, 0.9);
  ParamGrads g = ParamGrads::ZerosLike(net);
  g.weights[0](0, 0) = 1.0;
  opt.Step(net, g, 0.1);  // v = 1
  opt.Step(net, g, 0.1);  // v = 1.9
  EXPECT_NEAR(net.layers()[0].weights(0, 0), -0.1 - 0.19, 1e-15);
}

TEST(ScheduleTest, DropsAfterMilestones) {
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.lr = 0.1;
  cfg.milestones = {2};
  EXPECT_DOUBLE_EQ(cfg.LearningRateAt(1), 0.1);
  EXPECT_DOUBLE_EQ(cfg.LearningRateAt(2), 0.1);
  EXPECT_NEAR(cfg.LearningRateAt(3), 0.01, 1e-17);
}

TEST(ScheduleTest, RecordedRateIsNonIncreasing) {
  const Dataset ds = TwoClusters(10, 1);
  TrainConfig cfg = QuickConfig(12);
  cfg.milestones = {3, 7};
  RngStream init(1, 1);
  const TrainResult r = Train(Network({2, 4, 2}, Activation::kRelu, 0.0, init), ds, ds, cfg);
  for (std::size_t e = 1; e < r.history.size(); ++e) {
    EXPECT_LE(r.history[e].lr, r.history[e - 1].lr);
    const bool drop = r.history[e].lr < r.history[e - 1].lr;
    EXPECT_EQ(drop, e == 3 || e == 7) << "epoch " << e + 1;
  }
}

TEST(TrainConfigTest, Validation) {
  TrainConfig cfg;
  cfg.milestones = {50, 40};
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg.milestones = {200};
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.momentum = 1.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.lr = 0.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
}

TEST(TrainTest, SeparablePointsReachFullAccuracy) {
  // 50 points split by the line x0 = 0 with a margin of 0.2 on each side.
  RngStream rng(11, 0);
  Dataset ds;
  ds.num_classes = 2;
  ds.features = Mat(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    const std::size_t y = i % 2;
    ds.features(i, 0) = (y == 1 ? 1.0 : -1.0) * rng.Uniform(0.2, 2.0);
    ds.features(i, 1) = rng.Uniform(-2.0, 2.0);
    ds.labels.push_back(y);
  }
  TrainConfig cfg = QuickConfig(200);
  cfg.lr = 0.1;
  RngStream init(2, 1);
  const TrainResult r = Train(Network({2, 16, 2}, Activation::kRelu, 0.0, init), ds, ds, cfg);
  EXPECT_DOUBLE_EQ(r.history.back().train_acc, 1.0);
  ASSERT_EQ(r.history.size(), 200u);
}

TEST(TrainTest, IdenticalSeedsGiveIdenticalParameters) {
  const Dataset ds = SynthBlobs(3, 4, 20, 1.0, 2);
  TrainConfig cfg = QuickConfig(15);
  const auto run = [&] {
    RngStream init(8, 1);
    return Train(Network({4, 8, 3}, Activation::kRelu, 0.3, init), ds, ds, cfg);
  };
  const TrainResult a = run(), b = run();
  EXPECT_TRUE(a.net.SameParameters(b.net));
  EXPECT_EQ(a.history.back().train_loss_mean, b.history.back().train_loss_mean);
}

TEST(TrainTest, RelaxLossBelowEveryBatchIsPlainSgd) {
  const Dataset ds = SynthBlobs(3, 4, 20, 1.0, 3);
  const TrainConfig plain = QuickConfig(10);
  TrainConfig relax = plain;
  relax.defense = RelaxLossDefense{0.0};
  RngStream i1(4, 1), i2(4, 1);
  const TrainResult a = Train(Network({4, 8, 3}, Activation::kRelu, 0.0, i1), ds, ds, plain);
  const TrainResult b = Train(Network({4, 8, 3}, Activation::kRelu, 0.0, i2), ds, ds, relax);
  EXPECT_TRUE(a.net.SameParameters(b.net));
  for (const auto& s : b.history) EXPECT_EQ(s.ascent_batches, 0u);
}

TEST(TrainTest, RelaxLossAscendsBelowThreshold) {
  const Dataset ds = SynthBlobs(2, 2, 30, 0.2, 4);
  TrainConfig cfg = QuickConfig(60);
  cfg.defense = RelaxLossDefense{0.5};
  RngStream init(4, 1);
  const TrainResult r = Train(Network({2, 8, 2}, Activation::kRelu, 0.0, init), ds, ds, cfg);
  std::size_t ascents = 0;
  for (const auto& s : r.history) ascents += s.ascent_batches;
  EXPECT_GT(ascents, 0u);
  // The flips keep the mean training loss from collapsing below the threshold.
  EXPECT_GT(r.history.back().train_loss_mean, 0.2);
}

TEST(TrainTest, EarlyStopCheckpoints) {
  const Dataset ds = SynthBlobs(2, 2, 10, 0.5, 4);
  TrainConfig cfg = QuickConfig(8);
  cfg.defense = EarlyStopDefense{{2, 5, 8}};
  RngStream init(1, 1);
  const TrainResult r = Train(Network({2, 4, 2}, Activation::kRelu, 0.0, init), ds, ds, cfg);
  ASSERT_EQ(r.checkpoints.size(), 3u);
  EXPECT_EQ(r.checkpoints[1].epoch, 5u);
  EXPECT_TRUE(r.checkpoints[2].net.SameParameters(r.net));
  EXPECT_FALSE(r.checkpoints[0].net.SameParameters(r.net));
}

TEST(TrainTest, DivergenceIsReported) {
  const Dataset ds = SynthBlobs(3, 4, 20, 1.0, 5);
  TrainConfig cfg = QuickConfig(50);
  cfg.lr = 1e6;
  cfg.momentum = 0.99;
  RngStream init(1, 1);
  EXPECT_THROW(Train(Network({4, 16, 3}, Activation::kRelu, 0.0, init), ds, ds, cfg),
               TrainingDiverged);
}

TEST(TrainTest, StatsStayInRange) {
  const Dataset ds = SynthBlobs(3, 4, 20, 2.0, 6);
  RngStream init(1, 1);
  const TrainResult r =
      Train(Network({4, 8, 3}, Activation::kTanh, 0.2, init), ds, ds, QuickConfig(10));
  for (const auto& s : r.history) {
    EXPECT_GE(s.train_acc, 0.0);
    EXPECT_LE(s.train_acc, 1.0);
    EXPECT_GE(s.train_loss_var, 0.0);
    EXPECT_GE(s.confidence_var, 0.0);
  }
}

TEST(PredictTest, ProbabilitiesSumToOne) {
  RngStream init(1, 1);
  const Network net({3, 5, 4}, Activation::kRelu, 0.0, init);
  const auto probs = PredictProbs(net, Mat(3, 3, 0.5));
  ASSERT_EQ(probs.size(), 3u);
  double sum = 0.0;
  for (double p : probs[0]) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(probs[0], PredictProbs(net, std::vector<double>{0.5, 0.5, 0.5}));
}

}  // namespace
}  // namespace ccl
