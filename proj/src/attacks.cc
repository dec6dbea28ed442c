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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ccl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Counts {
  std::size_t members = 0;
  std::size_t nonmembers = 0;
};

Counts CountMembership(std::span<const int> member) {
  Counts c;
  for (int m : member) (m ? c.members : c.nonmembers)++;
  return c;
}

// Best global threshold for a direction-aware metric over the given subset.
std::pair<double, double> BestThreshold(std::span<const double> values,
                                        std::span<const int> member,
                                        std::span<const std::size_t> subset,
                                        bool small_is_member) {
  std::vector<std::size_t> order(subset.begin(), subset.end());
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::size_t total_pos = 0;
  for (std::size_t i : order) total_pos += member[i] ? 1 : 0;
  const std::size_t total_neg = order.size() - total_pos;
  const double p = static_cast<double>(total_pos);
  const double n = static_cast<double>(total_neg);

  double best_tau = -kInf;
  double best_adv = 0.0;  // tau = -inf flags nobody (or everybody)
  std::size_t pos_below = 0;
  std::size_t neg_below = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    (member[i] ? pos_below : neg_below)++;
    if (k + 1 < order.size() && values[order[k + 1]] == values[i]) continue;
    if (k + 1 == order.size()) break;  // tau = +inf also yields advantage 0
    const double tau = 0.5 * (values[i] + values[order[k + 1]]);
    double adv;
    if (small_is_member) {
      adv = static_cast<double>(pos_below) / p - static_cast<double>(neg_below) / n;
    } else {
      adv = static_cast<double>(total_pos - pos_below) / p -
            static_cast<double>(total_neg - neg_below) / n;
    }
    if (adv > best_adv) {
      best_adv = adv;
      best_tau = tau;
    }
  }
  return {best_tau, best_adv};
}

double RuleAdvantage(const ThresholdRule& rule, std::span<const double> values,
                     std::span<const int> member, std::span<const std::size_t> labels) {
  const Counts c = CountMembership(member);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool hit = rule.PredictMember(values[i], labels.empty() ? 0 : labels[i]);
    if (hit) (member[i] ? tp : fp)++;
  }
  return static_cast<double>(tp) / static_cast<double>(c.members) -
         static_cast<double>(fp) / static_cast<double>(c.nonmembers);
}

std::vector<double> MetricValues(MetricKind metric, std::span<const ScoredQuery> qs) {
  std::vector<double> v(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) v[i] = ComputeMetric(metric, qs[i].probs, qs[i].label);
  return v;
}

}  // namespace

std::string MetricName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kCorrectness:
      return "correctness";
    case MetricKind::kLoss:
      return "loss";
    case MetricKind::kConfidence:
      return "confidence";
    case MetricKind::kEntropy:
      return "entropy";
    case MetricKind::kMEntropy:
      return "mentropy";
  }
  return "unknown";
}

MetricKind ParseMetric(const std::string& name) {
  for (MetricKind kind : kAllMetrics) {
    if (MetricName(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown attack metric '" + name + "'");
}

bool SmallIndicatesMember(MetricKind kind) {
  return kind == MetricKind::kLoss || kind == MetricKind::kEntropy ||
         kind == MetricKind::kMEntropy;
}

double ComputeMetric(MetricKind kind, std::span<const double> p, std::size_t y) {
  if (y >= p.size()) throw std::invalid_argument("ComputeMetric: class index out of range");
  switch (kind) {
    case MetricKind::kCorrectness:
      return Argmax(p) == y ? 1.0 : 0.0;
    case MetricKind::kLoss:
      return -std::log(ClampProb(p[y]));
    case MetricKind::kConfidence:
      return p[y];
    case MetricKind::kEntropy:
      return Entropy(p);
    case MetricKind::kMEntropy: {
      double v = -(1.0 - p[y]) * std::log(ClampProb(p[y]));
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (k != y) v -= p[k] * std::log(ClampProb(1.0 - p[k]));
      }
      return v;
    }
  }
  return 0.0;
}

std::vector<QueryRecord> MakeQueries(const Dataset& members, const Dataset& nonmembers) {
  std::vector<QueryRecord> out;
  out.reserve(members.size() + nonmembers.size());
  for (const auto* ds : {&members, &nonmembers}) {
    const int m = ds == &members ? 1 : 0;
    for (std::size_t i = 0; i < ds->size(); ++i) {
      const auto row = ds->features.row(i);
      out.push_back({Vec(row.begin(), row.end()), ds->labels[i], m});
    }
  }
  return out;
}

std::vector<ScoredQuery> ScoreQueries(const Network& model,
                                      std::span<const QueryRecord> queries) {
  std::vector<ScoredQuery> out;
  if (queries.empty()) return out;
  Mat xs(queries.size(), queries.front().features.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    std::copy(queries[i].features.begin(), queries[i].features.end(), xs.row(i).begin());
  }
  std::vector<Vec> probs = PredictProbs(model, xs);
  out.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out.push_back({std::move(probs[i]), queries[i].label, queries[i].member});
  }
  return out;
}

bool ThresholdRule::PredictMember(double metric_value, std::size_t label) const {
  if (metric == MetricKind::kCorrectness) return metric_value >= 0.5;
  const double t = (!class_taus.empty() && label < class_taus.size()) ? class_taus[label] : tau;
  return SmallIndicatesMember(metric) ? metric_value <= t : metric_value >= t;
}

ThresholdRule CalibrateOnValues(MetricKind metric, std::span<const double> values,
                                std::span<const int> member,
                                std::span<const std::size_t> labels, bool class_wise) {
  if (values.size() != member.size()) {
    throw std::invalid_argument("CalibrateThreshold: values and membership differ in length");
  }
  const Counts counts = CountMembership(member);
  if (counts.members == 0 || counts.nonmembers == 0) {
    throw std::invalid_argument("CalibrateThreshold: shadow queries need members and non-members");
  }
  if (class_wise && labels.size() != values.size()) {
    throw std::invalid_argument("CalibrateThreshold: class-wise rule needs labels");
  }
  ThresholdRule rule;
  rule.metric = metric;
  if (metric == MetricKind::kCorrectness) {
    rule.tau = kNaN;
    rule.shadow_advantage = RuleAdvantage(rule, values, member, labels);
    return rule;
  }
  const bool small = SmallIndicatesMember(metric);
  std::vector<std::size_t> all(values.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  rule.tau = BestThreshold(values, member, all, small).first;

  if (class_wise) {
    const std::size_t k = *std::max_element(labels.begin(), labels.end()) + 1;
    rule.class_taus.assign(k, rule.tau);
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<std::size_t> subset;
      Counts cc;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (labels[i] != c) continue;
        subset.push_back(i);
        (member[i] ? cc.members : cc.nonmembers)++;
      }
      if (cc.members == 0 || cc.nonmembers == 0) continue;  // keep the global tau
      rule.class_taus[c] = BestThreshold(values, member, subset, small).first;
    }
  }
  rule.shadow_advantage = RuleAdvantage(rule, values, member, labels);
  return rule;
}

ThresholdRule CalibrateThreshold(MetricKind metric, std::span<const ScoredQuery> shadow,
                                 bool class_wise) {
  const std::vector<double> values = MetricValues(metric, shadow);
  std::vector<int> member(shadow.size());
  std::vector<std::size_t> labels(shadow.size());
  for (std::size_t i = 0; i < shadow.size(); ++i) {
    member[i] = shadow[i].member;
    labels[i] = shadow[i].label;
  }
  return CalibrateOnValues(metric, values, member, labels, class_wise);
}

ThresholdRule CalibrateThreshold(MetricKind metric,
                                 std::span<const QueryRecord> shadow_queries,
                                 const Network& shadow_model, bool class_wise) {
  const auto scored = ScoreQueries(shadow_model, shadow_queries);
  return CalibrateThreshold(metric, scored, class_wise);
}

std::vector<int> RunMetricAttack(const ThresholdRule& rule,
                                 std::span<const ScoredQuery> queries) {
  std::vector<int> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const double v = ComputeMetric(rule.metric, queries[i].probs, queries[i].label);
    out[i] = rule.PredictMember(v, queries[i].label) ? 1 : 0;
  }
  return out;
}

std::vector<int> RunMetricAttack(const ThresholdRule& rule, const Network& target,
                                 std::span<const QueryRecord> queries) {
  return RunMetricAttack(rule, ScoreQueries(target, queries));
}

Vec NnAttack::Features(std::span<const double> probs, std::size_t label) {
  Vec f(probs.begin(), probs.end());
  std::sort(f.begin(), f.end(), std::greater<>());
  f.resize(2 * probs.size(), 0.0);
  f[probs.size() + label] = 1.0;
  return f;
}

double NnAttack::MemberProbability(const ScoredQuery& q) const {
  if (q.probs.size() != num_classes_) {
    throw std::invalid_argument("NnAttack: query has the wrong number of classes");
  }
  return PredictProbs(net_, Features(q.probs, q.label))[1];
}

std::vector<int> NnAttack::Predict(std::span<const ScoredQuery> queries) const {
  if (queries.empty()) return {};
  Mat xs(queries.size(), 2 * num_classes_);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const Vec f = Features(queries[i].probs, queries[i].label);
    std::copy(f.begin(), f.end(), xs.row(i).begin());
  }
  const std::vector<Vec> probs = PredictProbs(net_, xs);
  std::vector<int> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = probs[i][1] > 0.5 ? 1 : 0;
  return out;
}

NnAttack TrainNnAttack(std::span<const ScoredQuery> shadow, const NnAttackConfig& cfg) {
  std::vector<int> member(shadow.size());
  for (std::size_t i = 0; i < shadow.size(); ++i) member[i] = shadow[i].member;
  const Counts counts = CountMembership(member);
  if (counts.members == 0 || counts.nonmembers == 0) {
    throw std::invalid_argument("TrainNnAttack: shadow membership labels are single-class");
  }
  const std::size_t k = shadow.front().probs.size();
  Dataset ds;
  ds.name = "nn_attack";
  ds.num_classes = 2;
  ds.features = Mat(shadow.size(), 2 * k);
  for (std::size_t i = 0; i < shadow.size(); ++i) {
    const Vec f = NnAttack::Features(shadow[i].probs, shadow[i].label);
    std::copy(f.begin(), f.end(), ds.features.row(i).begin());
    ds.labels.push_back(static_cast<std::size_t>(shadow[i].member));
  }
  RngStream init(cfg.seed, 1);
  Network net({2 * k, cfg.hidden, 2}, Activation::kRelu, 0.0, init);
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.lr = cfg.lr;
  tc.momentum = cfg.momentum;
  tc.weight_decay = cfg.weight_decay;
  tc.milestones = {};
  tc.seed = cfg.seed;
  TrainResult trained = Train(std::move(net), ds, ds, tc);
  return NnAttack(std::move(trained.net), k);
}

NnAttack TrainNnAttack(const Network& shadow_model, std::span<const QueryRecord> shadow_queries,
                       const NnAttackConfig& cfg) {
  return TrainNnAttack(ScoreQueries(shadow_model, shadow_queries), cfg);
}

std::vector<AttackOutcome> RunAttackSuite(const Network& target,
                                          std::span<const Network* const> shadows,
                                          std::span<const QueryRecord> target_queries,
                                          std::span<const QueryRecord> shadow_queries,
                                          const AttackSuiteConfig& cfg) {
  if (shadows.empty()) throw std::invalid_argument("RunAttackSuite: no shadow model");
  const auto target_scored = ScoreQueries(target, target_queries);
  std::vector<std::vector<ScoredQuery>> shadow_scored;
  for (const Network* s : shadows) shadow_scored.push_back(ScoreQueries(*s, shadow_queries));

  std::vector<int> member(shadow_queries.size());
  std::vector<std::size_t> labels(shadow_queries.size());
  for (std::size_t i = 0; i < shadow_queries.size(); ++i) {
    member[i] = shadow_queries[i].member;
    labels[i] = shadow_queries[i].label;
  }

  std::vector<AttackOutcome> outcomes;
  for (MetricKind metric : cfg.metrics) {
    std::vector<double> values(shadow_queries.size(), 0.0);
    for (const auto& scored : shadow_scored) {
      const auto v = MetricValues(metric, scored);
      for (std::size_t i = 0; i < v.size(); ++i) values[i] += v[i];
    }
    for (double& v : values) v /= static_cast<double>(shadow_scored.size());
    const ThresholdRule rule = CalibrateOnValues(metric, values, member, labels, cfg.class_wise);

    AttackOutcome out;
    out.name = MetricName(metric);
    out.tau = rule.tau;
    out.shadow_advantage = rule.shadow_advantage;
    out.scores = MetricValues(metric, target_scored);
    out.predictions.resize(target_scored.size());
    for (std::size_t i = 0; i < target_scored.size(); ++i) {
      out.predictions[i] = rule.PredictMember(out.scores[i], target_scored[i].label) ? 1 : 0;
    }
    outcomes.push_back(std::move(out));
  }

  if (cfg.nn_attack) {
    const NnAttack attack = TrainNnAttack(shadow_scored.front(), cfg.nn);
    AttackOutcome out;
    out.name = "nn";
    out.tau = kNaN;
    const auto shadow_pred = attack.Predict(shadow_scored.front());
    std::size_t tp = 0, fp = 0;
    const Counts c = CountMembership(member);
    for (std::size_t i = 0; i < shadow_pred.size(); ++i) {
      if (shadow_pred[i]) (member[i] ? tp : fp)++;
    }
    out.shadow_advantage = static_cast<double>(tp) / static_cast<double>(c.members) -
                           static_cast<double>(fp) / static_cast<double>(c.nonmembers);
    out.predictions = attack.Predict(target_scored);
    out.scores.reserve(target_scored.size());
    for (const auto& q : target_scored) out.scores.push_back(attack.MemberProbability(q));
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

void WriteAttackPredictionsCsv(const std::filesystem::path& path,
                               std::span<const AttackOutcome> outcomes,
                               std::span<const QueryRecord> queries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "record_id,attack_name,predicted_m,true_m,metric_value\n";
  for (const AttackOutcome& o : outcomes) {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      out << i << "," << o.name << "," << o.predictions.at(i) << "," << queries[i].member
          << "," << o.scores.at(i) << "\n";
    }
  }
}

}  // namespace ccl
