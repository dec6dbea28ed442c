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

#include "ccl/metrics_theory.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace ccl {

AttackRates ComputeAttackRates(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("MembershipAdvantage: prediction and truth lengths differ");
  }
  std::size_t pos = 0, neg = 0, tp = 0, fp = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      ++pos;
      if (predicted[i]) ++tp;
    } else {
      ++neg;
      if (predicted[i]) ++fp;
    }
  }
  if (pos == 0 || neg == 0) {
    throw std::invalid_argument("MembershipAdvantage: truth needs members and non-members");
  }
  AttackRates r;
  r.tpr = static_cast<double>(tp) / static_cast<double>(pos);
  r.fpr = static_cast<double>(fp) / static_cast<double>(neg);
  r.advantage = r.tpr - r.fpr;
  return r;
}

double MembershipAdvantage(std::span<const int> predicted, std::span<const int> truth) {
  return ComputeAttackRates(predicted, truth).advantage;
}

double P1Score(double accuracy, double advantage) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw std::invalid_argument("P1Score: accuracy must lie in [0, 1]");
  }
  if (!(advantage >= 0.0 && advantage <= 1.0)) {
    throw std::invalid_argument("P1Score: advantage must lie in [0, 1]");
  }
  const double privacy = 1.0 - advantage;
  const double denom = accuracy + privacy;
  if (denom == 0.0) return 0.0;
  return 2.0 * accuracy * privacy / denom;
}

nlohmann::ordered_json AttackReport::ToJson() const {
  nlohmann::ordered_json j;
  j["target"] = {{"test_acc", test_acc}, {"train_acc", train_acc}};
  j["attacks"] = nlohmann::ordered_json::array();
  for (const AttackEntry& a : attacks) {
    nlohmann::ordered_json e;
    e["name"] = a.name;
    e["adv"] = a.adv;
    e["tpr"] = a.tpr;
    e["fpr"] = a.fpr;
    e["tau"] = a.tau ? nlohmann::ordered_json(*a.tau) : nlohmann::ordered_json(nullptr);
    j["attacks"].push_back(std::move(e));
  }
  j["max_adv"] = max_adv;
  j["p1"] = p1;
  return j;
}

AttackReport AttackReport::FromJson(const nlohmann::json& j) {
  AttackReport r;
  r.test_acc = j.at("target").at("test_acc").get<double>();
  r.train_acc = j.at("target").at("train_acc").get<double>();
  for (const auto& e : j.at("attacks")) {
    AttackEntry a;
    a.name = e.at("name").get<std::string>();
    a.adv = e.at("adv").get<double>();
    a.tpr = e.at("tpr").get<double>();
    a.fpr = e.at("fpr").get<double>();
    if (!e.at("tau").is_null()) a.tau = e.at("tau").get<double>();
    r.attacks.push_back(std::move(a));
  }
  r.max_adv = j.at("max_adv").get<double>();
  r.p1 = j.at("p1").get<double>();
  return r;
}

AttackReport BuildAttackReport(double train_acc, double test_acc,
                               std::span<const AttackOutcome> outcomes,
                               std::span<const int> truth) {
  AttackReport report;
  report.train_acc = train_acc;
  report.test_acc = test_acc;
  report.max_adv = -1.0;
  for (const AttackOutcome& o : outcomes) {
    const AttackRates rates = ComputeAttackRates(o.predictions, truth);
    AttackEntry e{o.name, rates.advantage, rates.tpr, rates.fpr, std::nullopt};
    if (std::isfinite(o.tau)) e.tau = o.tau;
    report.max_adv = std::max(report.max_adv, rates.advantage);
    report.attacks.push_back(std::move(e));
  }
  if (outcomes.empty()) report.max_adv = 0.0;
  report.p1 = P1Score(test_acc, std::clamp(report.max_adv, 0.0, 1.0));
  return report;
}

void GaussianLossModel::Validate() const {
  if (!(sigma_s > 0.0) || !(sigma_d > 0.0)) {
    throw std::invalid_argument("GaussianLossModel: standard deviations must be > 0");
  }
  if (!std::isfinite(mu_s) || !std::isfinite(mu_d) || !std::isfinite(sigma_s) ||
      !std::isfinite(sigma_d)) {
    throw std::invalid_argument("GaussianLossModel: parameters must be finite");
  }
}

double GaussianAdvantage(const GaussianLossModel& model, double tau) {
  model.Validate();
  if (std::isinf(tau)) return 0.0;
  return StdNormalCdf((tau - model.mu_s) / model.sigma_s) -
         StdNormalCdf((tau - model.mu_d) / model.sigma_d);
}

double GaussianAdvantageAtFpr(const GaussianLossModel& model, double alpha_fpr) {
  model.Validate();
  if (!(alpha_fpr > 0.0 && alpha_fpr < 1.0)) {
    throw std::invalid_argument("GaussianAdvantageAtFpr: alpha must lie in (0, 1)");
  }
  const double shift = StdNormalQuantile(alpha_fpr) * model.sigma_d + model.mu_d - model.mu_s;
  return StdNormalCdf(shift / model.sigma_s) - alpha_fpr;
}

double ProbFunctional::Evaluate(std::span<const double> p) const {
  switch (kind) {
    case Kind::kEntropy:
      return ComputeMetric(MetricKind::kEntropy, p, 0);
    case Kind::kConfidence:
      return ComputeMetric(MetricKind::kConfidence, p, label);
    case Kind::kLoss:
      return ComputeMetric(MetricKind::kLoss, p, label);
    case Kind::kMEntropy:
      return ComputeMetric(MetricKind::kMEntropy, p, label);
    case Kind::kLinear: {
      if (coeffs.size() != p.size()) {
        throw std::invalid_argument("ProbFunctional: coefficient length mismatch");
      }
      double v = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) v += coeffs[i] * p[i];
      return v;
    }
  }
  return 0.0;
}

Vec ProbFunctional::Jacobian(std::span<const double> mu) const {
  Vec j(mu.size(), 0.0);
  switch (kind) {
    case Kind::kEntropy:
      for (std::size_t k = 0; k < mu.size(); ++k) j[k] = -(1.0 + std::log(ClampProb(mu[k])));
      return j;
    case Kind::kConfidence:
      j.at(label) = 1.0;
      return j;
    case Kind::kLinear:
      if (coeffs.size() != mu.size()) {
        throw std::invalid_argument("ProbFunctional: coefficient length mismatch");
      }
      return coeffs;
    case Kind::kLoss:
    case Kind::kMEntropy:
      break;
  }
  // Central differences in each coordinate, unconstrained by the simplex.
  Vec x(mu.begin(), mu.end());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(mu[k]));
    const double saved = x[k];
    x[k] = saved + h;
    const double up = Evaluate(x);
    x[k] = saved - h;
    const double down = Evaluate(x);
    x[k] = saved;
    j[k] = (up - down) / (2.0 * h);
  }
  return j;
}

double DeltaVariance(const ProbFunctional& f, std::span<const double> mu, const Mat& sigma) {
  const std::size_t k = mu.size();
  if (sigma.rows() != k || sigma.cols() != k) {
    throw std::invalid_argument("DeltaVariance: covariance must be K x K");
  }
  Eigen::MatrixXd s(k, k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) s(r, c) = sigma(r, c);
  }
  constexpr double kTol = 1e-9;
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > kTol) {
    throw std::invalid_argument("DeltaVariance: covariance is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kTol) {
    throw std::invalid_argument("DeltaVariance: covariance is not positive semidefinite");
  }
  const Vec jac = f.Jacobian(mu);
  const Eigen::Map<const Eigen::VectorXd> j(jac.data(), static_cast<Eigen::Index>(k));
  return j.dot(s * j);
}

DirichletMoments ComputeDirichletMoments(std::span<const double> alphas) {
  if (alphas.empty()) throw std::invalid_argument("Dirichlet: no parameters");
  double total = 0.0;
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("Dirichlet: parameters must be positive");
    }
    total += a;
  }
  const std::size_t k = alphas.size();
  DirichletMoments m;
  m.mean.resize(k);
  for (std::size_t i = 0; i < k; ++i) m.mean[i] = alphas[i] / total;
  m.covariance = Mat(k, k);
  const double denom = total + 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      m.covariance(i, j) = i == j ? m.mean[i] * (1.0 - m.mean[i]) / denom
                                  : -m.mean[i] * m.mean[j] / denom;
    }
  }
  return m;
}

}  // namespace ccl
