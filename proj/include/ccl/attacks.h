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

// Black-box membership inference attacks: five metric-threshold attacks and
// a neural-network attack, all calibrated on a shadow model that mirrors the
// target's training recipe.

#ifndef CCL_ATTACKS_H_
#define CCL_ATTACKS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ccl/data.h"
#include "ccl/nnet.h"
#include "ccl/numerics.h"

namespace ccl {

enum class MetricKind { kCorrectness, kLoss, kConfidence, kEntropy, kMEntropy };

inline constexpr MetricKind kAllMetrics[] = {MetricKind::kCorrectness, MetricKind::kLoss,
                                             MetricKind::kConfidence, MetricKind::kEntropy,
                                             MetricKind::kMEntropy};

std::string MetricName(MetricKind kind);
MetricKind ParseMetric(const std::string& name);
// Loss, Entropy and MEntropy: small values indicate members. Confidence:
// large values do. Correctness is a binary rule and returns false.
bool SmallIndicatesMember(MetricKind kind);

// Loss = -log p_y, Confidence = p_y, Entropy = -sum p log p,
// MEntropy = -(1 - p_y) log p_y - sum_{k != y} p_k log(1 - p_k),
// Correctness = 1 iff argmax p == y.
double ComputeMetric(MetricKind kind, std::span<const double> p, std::size_t y);

struct QueryRecord {
  Vec features;
  std::size_t label = 0;
  int member = 0;  // 1 iff drawn from the model's training set
};

std::vector<QueryRecord> MakeQueries(const Dataset& members, const Dataset& nonmembers);

// Model output on one query.
struct ScoredQuery {
  Vec probs;
  std::size_t label = 0;
  int member = 0;
};

std::vector<ScoredQuery> ScoreQueries(const Network& model,
                                      std::span<const QueryRecord> queries);

struct ThresholdRule {
  MetricKind metric = MetricKind::kLoss;
  double tau = 0.0;                // NaN for Correctness
  std::vector<double> class_taus;  // empty unless class-wise
  double shadow_advantage = 0.0;

  bool PredictMember(double metric_value, std::size_t label) const;
};

// Exact maximisation of the membership advantage over thresholds placed at
// midpoints of the sorted metric values plus both infinities. Ties go to the
// smallest threshold. Throws when membership is single-class.
ThresholdRule CalibrateOnValues(MetricKind metric, std::span<const double> values,
                                std::span<const int> member,
                                std::span<const std::size_t> labels = {},
                                bool class_wise = false);
ThresholdRule CalibrateThreshold(MetricKind metric, std::span<const ScoredQuery> shadow,
                                 bool class_wise = false);
ThresholdRule CalibrateThreshold(MetricKind metric,
                                 std::span<const QueryRecord> shadow_queries,
                                 const Network& shadow_model, bool class_wise = false);

std::vector<int> RunMetricAttack(const ThresholdRule& rule,
                                 std::span<const ScoredQuery> queries);
std::vector<int> RunMetricAttack(const ThresholdRule& rule, const Network& target,
                                 std::span<const QueryRecord> queries);

struct NnAttackConfig {
  std::size_t hidden = 64;
  std::size_t epochs = 60;
  std::size_t batch_size = 64;
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::uint64_t seed = 4;
};

// Binary classifier over (probabilities sorted descending) ++ onehot(label).
class NnAttack {
 public:
  NnAttack(Network net, std::size_t num_classes)
      : net_(std::move(net)), num_classes_(num_classes) {}

  static Vec Features(std::span<const double> probs, std::size_t label);

  double MemberProbability(const ScoredQuery& q) const;
  int PredictMember(const ScoredQuery& q) const { return MemberProbability(q) > 0.5; }
  std::vector<int> Predict(std::span<const ScoredQuery> queries) const;

  const Network& network() const { return net_; }

 private:
  Network net_;
  std::size_t num_classes_;
};

NnAttack TrainNnAttack(std::span<const ScoredQuery> shadow, const NnAttackConfig& cfg);
NnAttack TrainNnAttack(const Network& shadow_model, std::span<const QueryRecord> shadow_queries,
                       const NnAttackConfig& cfg);

struct AttackSuiteConfig {
  std::vector<MetricKind> metrics = {std::begin(kAllMetrics), std::end(kAllMetrics)};
  bool nn_attack = true;
  bool class_wise = false;
  NnAttackConfig nn;
};

struct AttackOutcome {
  std::string name;
  std::vector<int> predictions;  // aligned with the target queries
  std::vector<double> scores;    // metric value, or member probability for "nn"
  double tau = 0.0;              // NaN when the attack has no scalar threshold
  double shadow_advantage = 0.0;
};

// Calibrates every enabled attack on the shadow models (metric values are
// averaged across shadows; the NN attack uses the first shadow) and applies
// it to the target.
std::vector<AttackOutcome> RunAttackSuite(const Network& target,
                                          std::span<const Network* const> shadows,
                                          std::span<const QueryRecord> target_queries,
                                          std::span<const QueryRecord> shadow_queries,
                                          const AttackSuiteConfig& cfg);

// Columns: record_id, attack_name, predicted_m, true_m, metric_value.
void WriteAttackPredictionsCsv(const std::filesystem::path& path,
                               std::span<const AttackOutcome> outcomes,
                               std::span<const QueryRecord> queries);

}  // namespace ccl

#endif  // CCL_ATTACKS_H_
