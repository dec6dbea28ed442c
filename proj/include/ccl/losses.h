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

// Loss zoo: convex bases (cross-entropy, focal), concave terms of the
// true-class confidence, their convex-concave mixture, and the label
// smoothing / confidence penalty baselines. Every loss has an analytic
// gradient with respect to the logits.
//
// All losses here depend on the logits only through p = softmax(z). For a
// loss L(p_y) of the true-class confidence the chain rule gives
//
//   dL/dz_j = c(p_y) * (p_j - [j == y]),   c(p_y) = -p_y * L'(p_y),
//
// so a single coefficient describes the whole gradient. For cross-entropy
// c == 1; a concave term adds -(1 - alpha) * p_y * l'(p_y) >= 0 on top.

#ifndef CCL_LOSSES_H_
#define CCL_LOSSES_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "ccl/numerics.h"

namespace ccl {

enum class ConvexKind { kCrossEntropy, kFocal };

class ConvexBase {
 public:
  static ConvexBase CrossEntropy() { return ConvexBase(ConvexKind::kCrossEntropy, 0.0); }
  // -(1 - p)^gamma * log(p); gamma >= 0.
  static ConvexBase Focal(double gamma);

  ConvexKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  std::string Name() const;

  double Value(double p_y) const;
  double Derivative(double p_y) const;
  // -p_y * l'(p_y), the base contribution to c(p_y). Exactly 1 for CE.
  double GradientWeight(double p_y) const;

 private:
  ConvexBase(ConvexKind kind, double gamma) : kind_(kind), gamma_(gamma) {}
  ConvexKind kind_;
  double gamma_;
};

enum class ConcaveKind { kExponential, kQuadratic, kCustom };

// Decreasing, strictly concave function of p_y on [0, 1]. Values are not
// shifted: Quadratic(1) == -1.5 and Exponential(1) == -e.
class ConcaveTerm {
 public:
  using Fn = std::function<double(double)>;

  static ConcaveTerm Exponential();  // -exp(p)
  static ConcaveTerm Quadratic();    // -p - p^2 / 2
  // Test hook for fault injection; not reachable from config files.
  static ConcaveTerm Custom(std::string name, Fn value, Fn derivative);

  ConcaveKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  double Value(double p) const;
  double Derivative(double p) const;
  // A = -l'(1).
  double SlopeAtOne() const { return -Derivative(1.0); }

 private:
  ConcaveTerm(ConcaveKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}
  ConcaveKind kind_;
  std::string name_;
  Fn value_;
  Fn derivative_;
};

// scale * [alpha * base + (1 - alpha) * concave]. Without a concave term the
// loss is the scaled base and alpha is ignored.
class LossSpec {
 public:
  LossSpec(ConvexBase base, std::optional<ConcaveTerm> concave, double alpha,
           double scale = 1.0);

  static LossSpec CrossEntropy() {
    return LossSpec(ConvexBase::CrossEntropy(), std::nullopt, 1.0);
  }

  const ConvexBase& base() const { return base_; }
  const std::optional<ConcaveTerm>& concave() const { return concave_; }
  double alpha() const { return alpha_; }
  double scale() const { return scale_; }
  std::string Name() const;

  // c(p_y) evaluated at the clamped confidence; excludes the scale factor.
  double GradientCoefficient(double p_y) const;

 private:
  ConvexBase base_;
  std::optional<ConcaveTerm> concave_;
  double alpha_;
  double scale_;
};

double LossValue(const LossSpec& spec, std::span<const double> p, std::size_t y);
Vec LossGradLogits(const LossSpec& spec, std::span<const double> z, std::size_t y);

// Checks alpha <= c(p_y) <= alpha + A (1 - alpha) within tol and that every
// gradient component has the sign of the CE gradient. Requires a CE base and
// a concave term.
bool GradBoundCheck(const LossSpec& spec, std::span<const double> z, std::size_t y,
                    double tol = 1e-9);

enum class BaselineKind { kLabelSmoothing, kConfidencePenalty };

struct BaselineLoss {
  BaselineKind kind;
  double param;  // smoothing s in [0, 1) or penalty weight beta >= 0

  static BaselineLoss LabelSmoothing(double smoothing);
  static BaselineLoss ConfidencePenalty(double beta);
  std::string Name() const;
};

double BaselineLossValue(const BaselineLoss& loss, std::span<const double> p,
                         std::size_t y);
Vec BaselineLossGradLogits(const BaselineLoss& loss, std::span<const double> z,
                           std::size_t y);

// What a network is trained on.
using TrainingLoss = std::variant<LossSpec, BaselineLoss>;

double TrainingLossValue(const TrainingLoss& loss, std::span<const double> p,
                         std::size_t y);
Vec TrainingLossGradLogits(const TrainingLoss& loss, std::span<const double> z,
                           std::size_t y);
std::string TrainingLossName(const TrainingLoss& loss);

double CrossEntropy(std::span<const double> p, std::size_t y);

// Moment bounds on samples of the true-class confidence, with
// eps = 1 - mean(p) and sigma2 = var(p).
struct ConfidenceBoundCheck {
  double lhs;    // sample expectation of the loss
  double bound;  // lower (convex) or upper (concave) bound
  double eps;
  double sigma2;
};

// E[-log p] against eps + (eps^2 + sigma2) / 2.
ConfidenceBoundCheck CrossEntropyLowerBound(std::span<const double> p_samples);
// E[l(p) - l(1)] against A * eps.
ConfidenceBoundCheck ConcaveUpperBound(const ConcaveTerm& term,
                                       std::span<const double> p_samples);

}  // namespace ccl

#endif  // CCL_LOSSES_H_
