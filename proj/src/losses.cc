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

#include "ccl/losses.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ccl {
namespace {

void CheckClass(std::size_t y, std::size_t k, const char* what) {
  if (y >= k) {
    std::ostringstream msg;
    msg << what << ": class index " << y << " out of range for " << k << " classes";
    throw std::invalid_argument(msg.str());
  }
}

std::string FormatNumber(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

double CrossEntropy(std::span<const double> p, std::size_t y) {
  CheckClass(y, p.size(), "CrossEntropy");
  return -std::log(ClampProb(p[y]));
}

ConvexBase ConvexBase::Focal(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("Focal: gamma must be >= 0");
  }
  return ConvexBase(ConvexKind::kFocal, gamma);
}

std::string ConvexBase::Name() const {
  if (kind_ == ConvexKind::kCrossEntropy) return "ce";
  return "focal(" + FormatNumber(gamma_) + ")";
}

double ConvexBase::Value(double p_y) const {
  const double p = ClampProb(p_y);
  const double ce = -std::log(p);
  if (kind_ == ConvexKind::kCrossEntropy) return ce;
  return std::pow(1.0 - p, gamma_) * ce;
}

double ConvexBase::Derivative(double p_y) const {
  const double p = ClampProb(p_y);
  return -GradientWeight(p) / p;
}

double ConvexBase::GradientWeight(double p_y) const {
  if (kind_ == ConvexKind::kCrossEntropy || gamma_ == 0.0) return 1.0;
  const double p = ClampProb(p_y);
  if (p >= 1.0) return 0.0;
  const double q = 1.0 - p;
  return std::pow(q, gamma_) - gamma_ * p * std::pow(q, gamma_ - 1.0) * std::log(p);
}

ConcaveTerm ConcaveTerm::Exponential() {
  return ConcaveTerm(ConcaveKind::kExponential, "cel");
}

ConcaveTerm ConcaveTerm::Quadratic() {
  return ConcaveTerm(ConcaveKind::kQuadratic, "cql");
}

ConcaveTerm ConcaveTerm::Custom(std::string name, Fn value, Fn derivative) {
  ConcaveTerm term(ConcaveKind::kCustom, std::move(name));
  term.value_ = std::move(value);
  term.derivative_ = std::move(derivative);
  return term;
}

double ConcaveTerm::Value(double p) const {
  switch (kind_) {
    case ConcaveKind::kExponential:
      return -std::exp(p);
    case ConcaveKind::kQuadratic:
      return -p - 0.5 * p * p;
    case ConcaveKind::kCustom:
      return value_(p);
  }
  return 0.0;
}

double ConcaveTerm::Derivative(double p) const {
  switch (kind_) {
    case ConcaveKind::kExponential:
      return -std::exp(p);
    case ConcaveKind::kQuadratic:
      return -1.0 - p;
    case ConcaveKind::kCustom:
      return derivative_(p);
  }
  return 0.0;
}

LossSpec::LossSpec(ConvexBase base, std::optional<ConcaveTerm> concave, double alpha,
                   double scale)
    : base_(base), concave_(std::move(concave)), alpha_(alpha), scale_(scale) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("LossSpec: alpha must lie in [0, 1], got " +
                                FormatNumber(alpha));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("LossSpec: scale must be > 0, got " + FormatNumber(scale));
  }
}

std::string LossSpec::Name() const {
  std::string name = base_.Name();
  if (concave_) name += "+" + concave_->name() + "(alpha=" + FormatNumber(alpha_) + ")";
  if (scale_ != 1.0) name += "*" + FormatNumber(scale_);
  return name;
}

double LossSpec::GradientCoefficient(double p_y) const {
  const double p = ClampProb(p_y);
  const double base_weight = base_.GradientWeight(p);
  if (!concave_) return base_weight;
  return alpha_ * base_weight - (1.0 - alpha_) * p * concave_->Derivative(p);
}

double LossValue(const LossSpec& spec, std::span<const double> p, std::size_t y) {
  CheckClass(y, p.size(), "LossValue");
  const double py = ClampProb(p[y]);
  double value = spec.base().Value(py);
  if (spec.concave()) {
    value = spec.alpha() * value + (1.0 - spec.alpha()) * spec.concave()->Value(py);
  }
  return spec.scale() * value;
}

Vec LossGradLogits(const LossSpec& spec, std::span<const double> z, std::size_t y) {
  CheckClass(y, z.size(), "LossGradLogits");
  Vec grad = Softmax(z);
  const double c = spec.scale() * spec.GradientCoefficient(grad[y]);
  grad[y] -= 1.0;
  for (double& g : grad) g *= c;
  return grad;
}

bool GradBoundCheck(const LossSpec& spec, std::span<const double> z, std::size_t y,
                    double tol) {
  if (!spec.concave()) {
    throw std::invalid_argument("GradBoundCheck: loss has no concave term");
  }
  if (spec.base().kind() != ConvexKind::kCrossEntropy) {
    throw std::invalid_argument("GradBoundCheck: bound is stated for a CE base");
  }
  CheckClass(y, z.size(), "GradBoundCheck");
  Vec ce_grad = Softmax(z);
  const double c = spec.GradientCoefficient(ce_grad[y]);
  ce_grad[y] -= 1.0;
  const double alpha = spec.alpha();
  const double upper = alpha + spec.concave()->SlopeAtOne() * (1.0 - alpha);
  if (!(c >= alpha - tol && c <= upper + tol)) return false;

  const Vec grad = LossGradLogits(spec, z, y);
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  for (std::size_t j = 0; j < grad.size(); ++j) {
    if (sign(grad[j]) != sign(ce_grad[j])) return false;
  }
  return true;
}

BaselineLoss BaselineLoss::LabelSmoothing(double smoothing) {
  if (!(smoothing >= 0.0 && smoothing < 1.0)) {
    throw std::invalid_argument("LabelSmoothing: smoothing must lie in [0, 1), got " +
                                FormatNumber(smoothing));
  }
  return {BaselineKind::kLabelSmoothing, smoothing};
}

BaselineLoss BaselineLoss::ConfidencePenalty(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("ConfidencePenalty: weight must be >= 0, got " +
                                FormatNumber(beta));
  }
  return {BaselineKind::kConfidencePenalty, beta};
}

std::string BaselineLoss::Name() const {
  if (kind == BaselineKind::kLabelSmoothing) {
    return "label_smoothing(" + FormatNumber(param) + ")";
  }
  return "confidence_penalty(" + FormatNumber(param) + ")";
}

double BaselineLossValue(const BaselineLoss& loss, std::span<const double> p,
                         std::size_t y) {
  CheckClass(y, p.size(), "BaselineLossValue");
  if (loss.kind == BaselineKind::kLabelSmoothing) {
    const double k = static_cast<double>(p.size());
    double value = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double target = (j == y ? 1.0 - loss.param : 0.0) + loss.param / k;
      if (target > 0.0) value -= target * std::log(ClampProb(p[j]));
    }
    return value;
  }
  return -std::log(ClampProb(p[y])) - loss.param * Entropy(p);
}

Vec BaselineLossGradLogits(const BaselineLoss& loss, std::span<const double> z,
                           std::size_t y) {
  CheckClass(y, z.size(), "BaselineLossGradLogits");
  const Vec p = Softmax(z);
  Vec grad(p.size());
  if (loss.kind == BaselineKind::kLabelSmoothing) {
    const double k = static_cast<double>(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double target = (j == y ? 1.0 - loss.param : 0.0) + loss.param / k;
      grad[j] = p[j] - target;
    }
    return grad;
  }
  // dH/dz_j = -p_j (log p_j + H)
  const double h = Entropy(p);
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double log_p = p[j] > 0.0 ? std::log(ClampProb(p[j])) : 0.0;
    grad[j] = p[j] - (j == y ? 1.0 : 0.0) + loss.param * p[j] * (log_p + h);
  }
  return grad;
}

double TrainingLossValue(const TrainingLoss& loss, std::span<const double> p,
                         std::size_t y) {
  return std::visit(
      [&](const auto& l) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, LossSpec>) {
          return LossValue(l, p, y);
        } else {
          return BaselineLossValue(l, p, y);
        }
      },
      loss);
}

Vec TrainingLossGradLogits(const TrainingLoss& loss, std::span<const double> z,
                           std::size_t y) {
  return std::visit(
      [&](const auto& l) -> Vec {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, LossSpec>) {
          return LossGradLogits(l, z, y);
        } else {
          return BaselineLossGradLogits(l, z, y);
        }
      },
      loss);
}

std::string TrainingLossName(const TrainingLoss& loss) {
  return std::visit([](const auto& l) { return l.Name(); }, loss);
}

ConfidenceBoundCheck CrossEntropyLowerBound(std::span<const double> p_samples) {
  const DistStats stats = ComputeDistStats(p_samples);
  double loss = 0.0;
  for (double p : p_samples) loss -= std::log(ClampProb(p));
  const double eps = 1.0 - stats.mean;
  // A = -l'(1) = 1 and B = inf l'' = 1 on (0, 1] for -log.
  return {loss / static_cast<double>(p_samples.size()),
          eps + 0.5 * (eps * eps + stats.variance), eps, stats.variance};
}

ConfidenceBoundCheck ConcaveUpperBound(const ConcaveTerm& term,
                                       std::span<const double> p_samples) {
  const DistStats stats = ComputeDistStats(p_samples);
  const double at_one = term.Value(1.0);
  double shifted = 0.0;
  for (double p : p_samples) shifted += term.Value(p) - at_one;
  const double eps = 1.0 - stats.mean;
  return {shifted / static_cast<double>(p_samples.size()), term.SlopeAtOne() * eps, eps,
          stats.variance};
}

}  // namespace ccl
