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

#include "ccl/attacks.h"

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "ccl/metrics_theory.h"

namespace ccl {
namespace {

const Vec kP = {0.7, 0.2, 0.1};

double Advantage(const ThresholdRule& rule, std::span<const double> values,
                 std::span<const int> member) {
  std::vector<int> pred(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) pred[i] = rule.PredictMember(values[i], 0);
  return MembershipAdvantage(pred, member);
}

TEST(MetricTest, KnownValues) {
  EXPECT_NEAR(ComputeMetric(MetricKind::kLoss, kP, 0), 0.35667494393873238, 1e-14);
  EXPECT_NEAR(ComputeMetric(MetricKind::kEntropy, kP, 0), 0.80181855254333731, 1e-14);
  EXPECT_DOUBLE_EQ(ComputeMetric(MetricKind::kConfidence, kP, 0), 0.7);
  EXPECT_NEAR(ComputeMetric(MetricKind::kMEntropy, kP, 0), 0.16216724501024429, 1e-14);
  EXPECT_EQ(ComputeMetric(MetricKind::kCorrectness, kP, 0), 1.0);
  EXPECT_EQ(ComputeMetric(MetricKind::kCorrectness, kP, 1), 0.0);
}

TEST(MetricTest, DegenerateAndUniform) {
  const Vec onehot = {1.0, 0.0, 0.0};
  EXPECT_NEAR(ComputeMetric(MetricKind::kLoss, onehot, 0), 0.0, 1e-15);
  EXPECT_NEAR(ComputeMetric(MetricKind::kEntropy, onehot, 0), 0.0, 1e-10);
  EXPECT_NEAR(ComputeMetric(MetricKind::kMEntropy, onehot, 0), 0.0, 1e-10);
  EXPECT_EQ(ComputeMetric(MetricKind::kConfidence, onehot, 0), 1.0);
  EXPECT_NEAR(ComputeMetric(MetricKind::kEntropy, Vec(4, 0.25), 2), std::log(4.0), 1e-14);
  EXPECT_TRUE(std::isfinite(ComputeMetric(MetricKind::kMEntropy, onehot, 1)));
}

TEST(MetricTest, NamesRoundTripAndDirections) {
  for (MetricKind m : kAllMetrics) EXPECT_EQ(ParseMetric(MetricName(m)), m);
  EXPECT_THROW(ParseMetric("nope"), std::invalid_argument);
  EXPECT_TRUE(SmallIndicatesMember(MetricKind::kLoss));
  EXPECT_TRUE(SmallIndicatesMember(MetricKind::kEntropy));
  EXPECT_TRUE(SmallIndicatesMember(MetricKind::kMEntropy));
  EXPECT_FALSE(SmallIndicatesMember(MetricKind::kConfidence));
}

TEST(CalibrateTest, SeparatedLossesUseMidpoint) {
  const std::vector<double> v = {0.1, 0.2, 0.9, 1.0};
  const std::vector<int> m = {1, 1, 0, 0};
  const ThresholdRule rule = CalibrateOnValues(MetricKind::kLoss, v, m);
  EXPECT_DOUBLE_EQ(rule.tau, 0.55);
  EXPECT_DOUBLE_EQ(rule.shadow_advantage, 1.0);
}

TEST(CalibrateTest, ConfidenceDirection) {
  const std::vector<double> v = {0.95, 0.9, 0.3, 0.2};
  const std::vector<int> m = {1, 1, 0, 0};
  const ThresholdRule rule = CalibrateOnValues(MetricKind::kConfidence, v, m);
  EXPECT_DOUBLE_EQ(rule.tau, 0.6);
  EXPECT_DOUBLE_EQ(rule.shadow_advantage, 1.0);
}

TEST(CalibrateTest, IdenticalDistributionsGiveZero) {
  const std::vector<double> v = {0.5, 0.5, 0.5, 0.5};
  const std::vector<int> m = {1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(CalibrateOnValues(MetricKind::kLoss, v, m).shadow_advantage, 0.0);
}

TEST(CalibrateTest, TiesGoToSmallestThreshold) {
  // Every threshold between the member group and the non-member group
  // separates perfectly; so does the gap after 0.3. The smallest wins.
  const std::vector<double> v = {0.1, 0.3, 0.7, 0.9};
  const std::vector<int> m = {1, 0, 1, 0};
  const ThresholdRule rule = CalibrateOnValues(MetricKind::kLoss, v, m);
  EXPECT_DOUBLE_EQ(rule.tau, 0.2);
  EXPECT_DOUBLE_EQ(rule.shadow_advantage, 0.5);
}

TEST(CalibrateTest, SingleClassThrows) {
  const std::vector<double> v = {0.1, 0.2};
  EXPECT_THROW(CalibrateOnValues(MetricKind::kLoss, v, std::vector<int>{1, 1}),
               std::invalid_argument);
}

TEST(CalibrateTest, CorrectnessIgnoresThreshold) {
  const std::vector<double> v = {1, 1, 0, 1};
  const std::vector<int> m = {1, 1, 0, 0};
  const ThresholdRule rule = CalibrateOnValues(MetricKind::kCorrectness, v, m);
  EXPECT_TRUE(std::isnan(rule.tau));
  EXPECT_DOUBLE_EQ(rule.shadow_advantage, 0.5);
}

TEST(CalibrateTest, BeatsRandomThresholds) {
  RngStream rng(31, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(200);
    std::vector<int> m(200);
    for (std::size_t i = 0; i < v.size(); ++i) {
      m[i] = i % 2;
      v[i] = std::abs(rng.Normal() + (m[i] ? 0.0 : rng.Uniform(0.0, 2.0)));
    }
    const ThresholdRule best = CalibrateOnValues(MetricKind::kLoss, v, m);
    EXPECT_NEAR(Advantage(best, v, m), best.shadow_advantage, 1e-12);
    for (int r = 0; r < 200; ++r) {
      ThresholdRule random = best;
      random.tau = rng.Uniform(-0.5, 4.0);
      EXPECT_LE(Advantage(random, v, m), best.shadow_advantage + 1e-12);
    }
  }
}

TEST(CalibrateTest, ClassWiseUsesOwnThreshold) {
  // Class 0 members sit below 0.2, class 1 members below 2.0.
  const std::vector<double> v = {0.1, 0.15, 0.5, 0.6, 1.5, 1.8, 3.0, 3.5};
  const std::vector<int> m = {1, 1, 0, 0, 1, 1, 0, 0};
  const std::vector<std::size_t> y = {0, 0, 0, 0, 1, 1, 1, 1};
  const ThresholdRule rule = CalibrateOnValues(MetricKind::kLoss, v, m, y, true);
  ASSERT_EQ(rule.class_taus.size(), 2u);
  EXPECT_DOUBLE_EQ(rule.class_taus[0], 0.325);
  EXPECT_DOUBLE_EQ(rule.class_taus[1], 2.4);
  EXPECT_DOUBLE_EQ(rule.shadow_advantage, 1.0);
  EXPECT_TRUE(rule.PredictMember(1.0, 1));
  EXPECT_FALSE(rule.PredictMember(1.0, 0));
}

TEST(CalibrateTest, ShiftingMemberLossesFlipsAdvantage) {
  RngStream rng(32, 0);
  std::vector<double> v(400);
  std::vector<int> m(400);
  for (std::size_t i = 0; i < v.size(); ++i) {
    m[i] = i < 200;
    v[i] = rng.Uniform(0.0, 1.0) + (m[i] ? 0.0 : 0.5);
  }
  const ThresholdRule rule = CalibrateOnValues(MetricKind::kLoss, v, m);
  EXPECT_GT(Advantage(rule, v, m), 0.3);
  for (std::size_t i = 0; i < 200; ++i) v[i] += 1.0;
  EXPECT_LT(Advantage(rule, v, m), 0.0);
}

TEST(RunMetricAttackTest, HandBuiltQueries) {
  ThresholdRule rule;
  rule.metric = MetricKind::kLoss;
  rule.tau = -std::log(0.5);
  const std::vector<ScoredQuery> qs = {
      {{0.9, 0.1}, 0, 1}, {{0.4, 0.6}, 0, 0}, {{0.2, 0.8}, 1, 1}, {{0.5, 0.5}, 1, 0}};
  EXPECT_EQ(RunMetricAttack(rule, qs), (std::vector<int>{1, 0, 1, 1}));
  rule.tau = 100.0;
  EXPECT_EQ(RunMetricAttack(rule, qs), (std::vector<int>{1, 1, 1, 1}));
}

std::vector<ScoredQuery> SeparatedAttackSet(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<ScoredQuery> qs;
  for (std::size_t i = 0; i < n; ++i) {
    const int member = i % 2;
    const double top = member ? rng.Uniform(0.9, 1.0) : rng.Uniform(0.4, 0.6);
    const std::size_t y = rng.UniformIndex(3);
    Vec p(3, (1.0 - top) / 2.0);
    p[y] = top;
    qs.push_back({p, y, member});
  }
  return qs;
}

double NnAdvantage(const NnAttack& attack, std::span<const ScoredQuery> qs) {
  std::vector<int> truth;
  for (const auto& q : qs) truth.push_back(q.member);
  return MembershipAdvantage(attack.Predict(qs), truth);
}

TEST(NnAttackTest, SeparatesConfidentMembers) {
  const auto qs = SeparatedAttackSet(400, 1);
  const NnAttack attack = TrainNnAttack(qs, NnAttackConfig{});
  EXPECT_GE(NnAdvantage(attack, qs), 0.95);
}

TEST(NnAttackTest, PermutedMembershipGivesNoAdvantage) {
  auto qs = SeparatedAttackSet(400, 2);
  RngStream rng(3, 0);
  std::vector<int> m;
  for (const auto& q : qs) m.push_back(q.member);
  rng.Shuffle(std::span<int>(m));
  for (std::size_t i = 0; i < qs.size(); ++i) qs[i].member = m[i];
  const NnAttack attack = TrainNnAttack(qs, NnAttackConfig{});
  // Held-out records with the same feature law carry no membership signal.
  auto held_out = SeparatedAttackSet(2000, 5);
  for (std::size_t i = 0; i < held_out.size(); ++i) held_out[i].member = rng.UniformIndex(2);
  EXPECT_NEAR(NnAdvantage(attack, held_out), 0.0, 0.1);
}

TEST(NnAttackTest, DeterministicAndValidated) {
  const auto qs = SeparatedAttackSet(100, 4);
  const NnAttack a = TrainNnAttack(qs, NnAttackConfig{});
  const NnAttack b = TrainNnAttack(qs, NnAttackConfig{});
  EXPECT_TRUE(a.network().SameParameters(b.network()));
  auto single = qs;
  for (auto& q : single) q.member = 1;
  EXPECT_THROW(TrainNnAttack(single, NnAttackConfig{}), std::invalid_argument);
  const Vec f = NnAttack::Features(std::vector<double>{0.2, 0.5, 0.3}, 2);
  EXPECT_EQ(f, (Vec{0.5, 0.3, 0.2, 0.0, 0.0, 1.0}));
}

Dataset Points(std::size_t n, double offset, std::uint64_t seed) {
  Dataset ds = SynthBlobs(2, 3, n / 2, 1.0, seed);
  for (double& v : ds.features.data()) v += offset;
  return ds;
}

TEST(AttackSuiteTest, ConstantModelLeaksNothing) {
  Network constant = Network::Zeros({3, 4, 2}, Activation::kRelu);
  constant.mutable_layers()[1].bias = {0.3, -0.2};
  const auto target_q = MakeQueries(Points(40, 0.0, 1), Points(40, 0.0, 2));
  const auto shadow_q = MakeQueries(Points(40, 0.0, 3), Points(40, 0.0, 4));
  const Network* shadows[] = {&constant};
  AttackSuiteConfig cfg;
  cfg.nn.epochs = 5;
  const auto outcomes = RunAttackSuite(constant, shadows, target_q, shadow_q, cfg);
  ASSERT_EQ(outcomes.size(), 6u);
  std::vector<int> truth;
  for (const auto& q : target_q) truth.push_back(q.member);
  for (const auto& o : outcomes) {
    ASSERT_EQ(o.predictions.size(), target_q.size());
    EXPECT_NEAR(MembershipAdvantage(o.predictions, truth), 0.0, 0.05) << o.name;
  }
  EXPECT_EQ(outcomes.front().name, "correctness");
  EXPECT_EQ(outcomes.back().name, "nn");
}

TEST(AttackSuiteTest, PredictionsCsvLayout) {
  Network model = Network::Zeros({3, 2}, Activation::kRelu);
  const auto q = MakeQueries(Points(8, 0.0, 1), Points(8, 0.0, 2));
  const Network* shadows[] = {&model};
  AttackSuiteConfig cfg;
  cfg.metrics = {MetricKind::kLoss};
  cfg.nn_attack = false;
  const auto outcomes = RunAttackSuite(model, shadows, q, q, cfg);
  const auto path = std::filesystem::temp_directory_path() / "ccl_attack_preds.csv";
  WriteAttackPredictionsCsv(path, outcomes, q);
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "record_id,attack_name,predicted_m,true_m,metric_value");
  EXPECT_EQ(first.rfind("0,loss,", 0), 0u) << first;
  std::size_t lines = 2;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, q.size() + 1);
}

TEST(QueryTest, MembershipFlags) {
  const auto q = MakeQueries(Points(4, 0.0, 1), Points(6, 0.0, 2));
  ASSERT_EQ(q.size(), 10u);
  EXPECT_EQ(q[0].member, 1);
  EXPECT_EQ(q[3].member, 1);
  EXPECT_EQ(q[4].member, 0);
}

}  // namespace
}  // namespace ccl
