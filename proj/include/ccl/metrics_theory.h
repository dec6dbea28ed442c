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

// Privacy/utility metrics (membership advantage, P1) and the closed forms
// used to reason about loss-threshold attacks: Gaussian loss models,
// first-order delta-method variances and Dirichlet moments.

#ifndef CCL_METRICS_THEORY_H_
#define CCL_METRICS_THEORY_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccl/attacks.h"
#include "ccl/numerics.h"

namespace ccl {

struct AttackRates {
  double tpr = 0.0;
  double fpr = 0.0;
  double advantage = 0.0;  // tpr - fpr
};

// Throws when lengths differ or truth lacks members or non-members.
AttackRates ComputeAttackRates(std::span<const int> predicted, std::span<const int> truth);
double MembershipAdvantage(std::span<const int> predicted, std::span<const int> truth);

// 2 acc (1 - adv) / (acc + 1 - adv); 0 when the denominator vanishes.
double P1Score(double accuracy, double advantage);

struct AttackEntry {
  std::string name;
  double adv = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  std::optional<double> tau;  // absent for rules without a finite threshold
};

struct AttackReport {
  double train_acc = 0.0;
  double test_acc = 0.0;
  std::vector<AttackEntry> attacks;
  double max_adv = 0.0;
  double p1 = 0.0;

  // {target: {test_acc, train_acc}, attacks: [{name, adv, tpr, fpr, tau}], max_adv, p1}
  nlohmann::ordered_json ToJson() const;
  static AttackReport FromJson(const nlohmann::json& j);
};

// P1 uses the largest advantage over all attacks, floored at 0.
AttackReport BuildAttackReport(double train_acc, double test_acc,
                               std::span<const AttackOutcome> outcomes,
                               std::span<const int> truth);

struct GaussianLossModel {
  double mu_s = 0.0;     // member loss mean
  double sigma_s = 1.0;  // member loss standard deviation
  double mu_d = 0.0;     // non-member loss mean
  double sigma_d = 1.0;

  void Validate() const;
};

// Phi((tau - mu_s) / sigma_s) - Phi((tau - mu_d) / sigma_d).
double GaussianAdvantage(const GaussianLossModel& model, double tau);
// Advantage when tau fixes the false-positive rate at alpha_fpr:
// Phi((Phi^-1(alpha) sigma_d + mu_d - mu_s) / sigma_s) - alpha.
double GaussianAdvantageAtFpr(const GaussianLossModel& model, double alpha_fpr);

// A scalar function of the probability vector whose variance is propagated.
struct ProbFunctional {
  enum class Kind { kEntropy, kConfidence, kLoss, kMEntropy, kLinear };
  Kind kind = Kind::kEntropy;
  std::size_t label = 0;  // for confidence, loss, m-entropy
  Vec coeffs;             // for linear

  static ProbFunctional Entropy() { return {Kind::kEntropy, 0, {}}; }
  static ProbFunctional Confidence(std::size_t y) { return {Kind::kConfidence, y, {}}; }
  static ProbFunctional Loss(std::size_t y) { return {Kind::kLoss, y, {}}; }
  static ProbFunctional MEntropy(std::size_t y) { return {Kind::kMEntropy, y, {}}; }
  static ProbFunctional Linear(Vec a) { return {Kind::kLinear, 0, std::move(a)}; }

  double Evaluate(std::span<const double> p) const;
  // Analytic for entropy, confidence and linear; central differences otherwise.
  Vec Jacobian(std::span<const double> mu) const;
};

// J(mu)^T Sigma J(mu). Sigma must be symmetric PSD within 1e-9.
double DeltaVariance(const ProbFunctional& f, std::span<const double> mu, const Mat& sigma);

struct DirichletMoments {
  Vec mean;
  Mat covariance;
};

DirichletMoments ComputeDirichletMoments(std::span<const double> alphas);

}  // namespace ccl

#endif  // CCL_METRICS_THEORY_H_
