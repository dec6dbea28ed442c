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

#include "ccl/theory.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "ccl/metrics_theory.h"
#include "ccl/numerics.h"

namespace ccl {
namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kTheoryStreamId = 5;

RngStream StreamFor(const TheoryOptions& opt, std::uint64_t check_id) {
  return RngStream(MixSeed(opt.seed, kTheoryStreamId), check_id);
}

std::vector<LossSpec> GradientSpecs(const TheoryOptions& opt) {
  std::vector<LossSpec> specs = {
      LossSpec::CrossEntropy(),
      LossSpec(ConvexBase::Focal(opt.focal_gamma), std::nullopt, 1.0)};
  for (const ConcaveTerm& term : opt.concave_terms) {
    for (double alpha : opt.alphas) {
      specs.emplace_back(ConvexBase::CrossEntropy(), term, alpha);
    }
  }
  return specs;
}

Vec RandomLogits(RngStream& rng, double spread) {
  const std::size_t k = 2 + rng.UniformIndex(9);
  Vec z(k);
  for (double& v : z) v = spread * rng.Normal();
  return z;
}

double MaxAbs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Central-difference slope A = -l'(1) taken from the term's values only, so
// a wrong derivative cannot vouch for itself.
double SlopeFromValues(const ConcaveTerm& term) {
  constexpr double h = 1e-4;
  return -(term.Value(1.0 + h) - term.Value(1.0 - h)) / (2.0 * h);
}

std::vector<double> BetaSamples(RngStream& rng, double a, double b, std::size_t n) {
  std::vector<double> p(n);
  for (double& v : p) v = rng.Beta(a, b);
  return p;
}

TheoryCheck Finish(std::string name, double statistic, double tolerance, bool passed,
                   ordered_json detail) {
  TheoryCheck c;
  c.name = std::move(name);
  c.statistic = statistic;
  c.tolerance = tolerance;
  c.passed = passed;
  c.detail = std::move(detail);
  return c;
}

}  // namespace

void TheoryOptions::Validate() const {
  if (samples < 100000) throw std::invalid_argument("theory: samples must be >= 100000");
  if (jobs == 0) throw std::invalid_argument("theory: jobs must be >= 1");
  if (concave_terms.empty()) throw std::invalid_argument("theory: no concave terms");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("theory: alpha outside [0, 1]");
  }
  if (sigma_grid < 2) throw std::invalid_argument("theory: sigma_grid must be >= 2");
  for (const auto& d : delta_dirichlets) {
    if (d.size() < 2) throw std::invalid_argument("theory: Dirichlet needs >= 2 parameters");
  }
}

ordered_json TheoryCheck::ToJson() const {
  ordered_json j;
  j["name"] = name;
  j["passed"] = passed;
  j["statistic"] = statistic;
  j["tolerance"] = tolerance;
  j["detail"] = detail.is_null() ? ordered_json::object() : detail;
  return j;
}

bool TheoryReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const TheoryCheck& TheoryReport::Find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no theory check named " + name);
}

ordered_json TheoryReport::ToJson() const {
  ordered_json j;
  j["seed"] = seed;
  j["samples"] = samples;
  j["passed"] = passed();
  j["checks"] = ordered_json::array();
  for (const auto& c : checks) j["checks"].push_back(c.ToJson());
  return j;
}

TheoryCheck CheckGradientFiniteDifference(const TheoryOptions& opt) {
  constexpr double h = 1e-6;
  RngStream rng = StreamFor(opt, 1);
  const auto specs = GradientSpecs(opt);
  double worst = 0.0;
  std::string worst_loss;
  for (std::size_t i = 0; i < opt.gradient_inputs; ++i) {
    const Vec z = RandomLogits(rng, 2.0);
    const std::size_t y = rng.UniformIndex(z.size());
    for (const LossSpec& spec : specs) {
      const Vec analytic = LossGradLogits(spec, z, y);
      Vec numeric(z.size());
      Vec zp = z;
      for (std::size_t j = 0; j < z.size(); ++j) {
        zp[j] = z[j] + h;
        const double up = LossValue(spec, Softmax(zp), y);
        zp[j] = z[j] - h;
        const double down = LossValue(spec, Softmax(zp), y);
        zp[j] = z[j];
        numeric[j] = (up - down) / (2.0 * h);
      }
      Vec diff(z.size());
      for (std::size_t j = 0; j < z.size(); ++j) diff[j] = analytic[j] - numeric[j];
      const double denom = std::max({MaxAbs(analytic), MaxAbs(numeric), 1e-300});
      const double rel = MaxAbs(diff) / denom;
      if (!(rel <= worst)) {
        worst = rel;
        worst_loss = spec.Name();
      }
    }
  }
  return Finish("gradient_finite_difference", worst, opt.gradient_rel_tol,
                worst <= opt.gradient_rel_tol,
                {{"inputs", opt.gradient_inputs},
                 {"losses", specs.size()},
                 {"step", h},
                 {"worst_loss", worst_loss}});
}

TheoryCheck CheckGradientSandwich(const TheoryOptions& opt) {
  RngStream rng = StreamFor(opt, 2);
  std::vector<LossSpec> specs;
  std::vector<double> slopes;
  for (const ConcaveTerm& term : opt.concave_terms) {
    for (double alpha : opt.alphas) {
      specs.emplace_back(ConvexBase::CrossEntropy(), term, alpha);
      slopes.push_back(SlopeFromValues(term));
    }
  }
  std::size_t violations = 0;
  double worst_excess = 0.0;
  for (std::size_t i = 0; i < opt.sandwich_inputs; ++i) {
    const Vec z = RandomLogits(rng, 3.0);
    const std::size_t y = rng.UniformIndex(z.size());
    Vec ce = Softmax(z);
    ce[y] -= 1.0;
    for (std::size_t s = 0; s < specs.size(); ++s) {
      const LossSpec& spec = specs[s];
      bool ok = GradBoundCheck(spec, z, y, opt.sandwich_tol);
      if (ce[y] < 0.0) {
        const Vec grad = LossGradLogits(spec, z, y);
        const double c = grad[y] / (ce[y] * spec.scale());
        const double lo = spec.alpha();
        const double hi = spec.alpha() + slopes[s] * (1.0 - spec.alpha());
        const double excess = std::max(lo - c, c - hi);
        worst_excess = std::max(worst_excess, excess);
        if (!(excess <= opt.sandwich_tol)) ok = false;
      }
      if (!ok) ++violations;
    }
  }
  return Finish("gradient_sandwich", static_cast<double>(violations), 0.0, violations == 0,
                {{"inputs", opt.sandwich_inputs},
                 {"specs", specs.size()},
                 {"worst_excess", worst_excess},
                 {"bound_tol", opt.sandwich_tol}});
}

TheoryCheck CheckAccelerationMonotonicity(const TheoryOptions& opt) {
  constexpr std::size_t kGrid = 1000;
  double worst_drop = 0.0;
  for (const ConcaveTerm& term : opt.concave_terms) {
    for (double alpha : opt.alphas) {
      const LossSpec spec(ConvexBase::CrossEntropy(), term, alpha);
      double prev = spec.GradientCoefficient(1.0 / kGrid);
      for (std::size_t i = 2; i <= kGrid; ++i) {
        const double c = spec.GradientCoefficient(static_cast<double>(i) / kGrid);
        worst_drop = std::max(worst_drop, prev - c);
        prev = c;
      }
    }
  }
  return Finish("acceleration_monotonicity", worst_drop, 1e-12, worst_drop <= 1e-12,
                {{"grid", kGrid}});
}

TheoryCheck CheckCurvatureSigns(const TheoryOptions& opt) {
  constexpr double h = 1e-3;
  constexpr std::size_t kGrid = 99;
  std::size_t violations = 0;
  auto second = [&](const std::function<double(double)>& f, double p) {
    return (f(p + h) - 2.0 * f(p) + f(p - h)) / (h * h);
  };
  for (std::size_t i = 1; i <= kGrid; ++i) {
    const double p = static_cast<double>(i) / (kGrid + 1);
    for (const ConcaveTerm& term : opt.concave_terms) {
      if (!(second([&](double q) { return term.Value(q); }, p) < 0.0)) ++violations;
    }
    for (const ConvexBase& base :
         {ConvexBase::CrossEntropy(), ConvexBase::Focal(opt.focal_gamma)}) {
      if (!(second([&](double q) { return base.Value(q); }, p) > 0.0)) ++violations;
    }
  }
  return Finish("curvature_signs", static_cast<double>(violations), 0.0, violations == 0,
                {{"grid", kGrid}, {"step", h}});
}

TheoryCheck CheckConvexLowerBound(const TheoryOptions& opt) {
  RngStream rng = StreamFor(opt, 3);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < opt.beta_distributions; ++d) {
    const double a = rng.Uniform(0.5, 20.0);
    const double b = rng.Uniform(0.5, 20.0);
    const auto p = BetaSamples(rng, a, b, opt.samples);
    const ConfidenceBoundCheck r = CrossEntropyLowerBound(p);
    worst = std::min(worst, r.lhs - r.bound);
  }
  return Finish("convex_loss_lower_bound", worst, -opt.moment_bound_tol,
                worst >= -opt.moment_bound_tol,
                {{"distributions", opt.beta_distributions}, {"samples", opt.samples},
                 {"statistic", "min slack E[-log p] - (eps + (eps^2 + var) / 2)"}});
}

TheoryCheck CheckConcaveUpperBound(const TheoryOptions& opt) {
  RngStream rng = StreamFor(opt, 4);
  double worst = -std::numeric_limits<double>::infinity();
  ordered_json per_term = ordered_json::object();
  std::vector<double> term_worst(opt.concave_terms.size(),
                                 -std::numeric_limits<double>::infinity());
  for (std::size_t d = 0; d < opt.beta_distributions; ++d) {
    const double a = rng.Uniform(0.5, 20.0);
    const double b = rng.Uniform(0.5, 20.0);
    const auto p = BetaSamples(rng, a, b, opt.samples);
    for (std::size_t t = 0; t < opt.concave_terms.size(); ++t) {
      const ConfidenceBoundCheck r = ConcaveUpperBound(opt.concave_terms[t], p);
      term_worst[t] = std::max(term_worst[t], r.lhs - r.bound);
    }
  }
  for (std::size_t t = 0; t < opt.concave_terms.size(); ++t) {
    per_term[opt.concave_terms[t].name()] = term_worst[t];
    worst = std::max(worst, term_worst[t]);
  }
  return Finish("concave_loss_upper_bound", worst, opt.moment_bound_tol,
                worst <= opt.moment_bound_tol,
                {{"distributions", opt.beta_distributions}, {"samples", opt.samples},
                 {"max_gap_per_term", per_term}});
}

TheoryCheck CheckGaussianAdvantage(const TheoryOptions& opt) {
  RngStream rng = StreamFor(opt, 5);
  double worst = 0.0;
  for (std::size_t m = 0; m < opt.gaussian_models; ++m) {
    GaussianLossModel model;
    model.mu_s = rng.Uniform(0.0, 2.0);
    model.sigma_s = rng.Uniform(0.2, 2.0);
    model.mu_d = model.mu_s + rng.Uniform(0.0, 2.0);
    model.sigma_d = rng.Uniform(0.2, 2.0);
    const double tau = rng.Uniform(model.mu_s - model.sigma_s, model.mu_d + model.sigma_d);
    std::size_t member_hits = 0, nonmember_hits = 0;
    for (std::size_t i = 0; i < opt.samples; ++i) {
      member_hits += model.mu_s + model.sigma_s * rng.Normal() <= tau;
      nonmember_hits += model.mu_d + model.sigma_d * rng.Normal() <= tau;
    }
    const double n = static_cast<double>(opt.samples);
    const double empirical = member_hits / n - nonmember_hits / n;
    worst = std::max(worst, std::abs(empirical - GaussianAdvantage(model, tau)));
  }
  // The tolerance is stated for 1e6 draws; fewer draws widen it by the
  // usual square-root factor.
  const double tol =
      opt.gaussian_tol * std::sqrt(std::max(1.0, 1e6 / static_cast<double>(opt.samples)));
  return Finish("gaussian_threshold_advantage", worst, tol, worst <= tol,
                {{"models", opt.gaussian_models}, {"samples", opt.samples}});
}

TheoryCheck CheckAdvantageDecreasesWithMemberSpread(const TheoryOptions& opt) {
  std::size_t curves = 0, violations = 0;
  for (double fpr : {0.01, 0.05, 0.1, 0.3, 0.5}) {
    for (double gap : {0.5, 1.0, 2.0}) {
      for (double sigma_d : {0.5, 1.0, 2.0}) {
        // Monotonicity is only claimed where the shifted quantile is positive.
        if (!(StdNormalQuantile(fpr) * sigma_d + gap > 0.0)) continue;
        ++curves;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < opt.sigma_grid; ++i) {
          const double sigma_s = 0.5 + 3.5 * static_cast<double>(i) / (opt.sigma_grid - 1);
          const double adv = GaussianAdvantageAtFpr({0.0, sigma_s, gap, sigma_d}, fpr);
          if (!(adv < prev)) ++violations;
          prev = adv;
        }
      }
    }
  }
  return Finish("advantage_decreases_with_member_variance", static_cast<double>(violations),
                0.0, violations == 0 && curves > 0,
                {{"curves", curves}, {"grid", opt.sigma_grid}});
}

TheoryCheck CheckDeltaMethodVariance(const TheoryOptions& opt) {
  RngStream rng = StreamFor(opt, 6);
  double worst = 0.0;
  ordered_json cases = ordered_json::array();
  for (const auto& alphas : opt.delta_dirichlets) {
    const DirichletMoments mom = ComputeDirichletMoments(alphas);
    const std::vector<ProbFunctional> fs = {ProbFunctional::Entropy(),
                                            ProbFunctional::Confidence(0)};
    std::vector<RunningStats> mc(fs.size());
    for (std::size_t i = 0; i < opt.samples; ++i) {
      const Vec p = rng.Dirichlet(alphas);
      for (std::size_t f = 0; f < fs.size(); ++f) mc[f].Add(fs[f].Evaluate(p));
    }
    for (std::size_t f = 0; f < fs.size(); ++f) {
      const double predicted = DeltaVariance(fs[f], mom.mean, mom.covariance);
      const double observed = mc[f].Get().variance;
      const double rel = std::abs(predicted - observed) / observed;
      worst = std::max(worst, rel);
      cases.push_back({{"alphas", alphas},
                       {"functional", f == 0 ? "entropy" : "confidence"},
                       {"delta", predicted},
                       {"monte_carlo", observed},
                       {"rel_error", rel}});
    }
  }
  return Finish("delta_method_variance", worst, opt.delta_rel_tol, worst <= opt.delta_rel_tol,
                {{"samples", opt.samples}, {"cases", cases}});
}

TheoryCheck CheckDirichletVarianceOrdering(const TheoryOptions& opt) {
  RngStream rng = StreamFor(opt, 7);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < opt.ordering_pairs; ++i) {
    const std::size_t k = 2 + rng.UniformIndex(9);
    Vec mean(k);
    double total = 0.0;
    for (double& m : mean) total += (m = rng.Uniform(0.05, 1.0));
    for (double& m : mean) m /= total;
    const double small = rng.Uniform(0.5, 20.0);
    const double large = small * rng.Uniform(1.5, 10.0);
    Vec a(k), b(k);
    for (std::size_t j = 0; j < k; ++j) {
      a[j] = mean[j] * large;
      b[j] = mean[j] * small;
    }
    const DirichletMoments ma = ComputeDirichletMoments(a);
    const DirichletMoments mb = ComputeDirichletMoments(b);
    const std::size_t y = rng.UniformIndex(k);
    for (const ProbFunctional& f :
         {ProbFunctional::Entropy(), ProbFunctional::Confidence(y)}) {
      if (!(DeltaVariance(f, ma.mean, ma.covariance) <
            DeltaVariance(f, mb.mean, mb.covariance))) {
        ++violations;
      }
    }
  }
  return Finish("dirichlet_variance_ordering", static_cast<double>(violations), 0.0,
                violations == 0, {{"pairs", opt.ordering_pairs}});
}

TheoryCheck CheckDirichletMoments(const TheoryOptions& opt) {
  RngStream rng = StreamFor(opt, 8);
  double worst = 0.0;
  for (const auto& alphas : opt.delta_dirichlets) {
    const DirichletMoments mom = ComputeDirichletMoments(alphas);
    const std::size_t k = alphas.size();
    Vec sum(k, 0.0);
    Mat cross(k, k);
    for (std::size_t i = 0; i < opt.samples; ++i) {
      const Vec p = rng.Dirichlet(alphas);
      for (std::size_t r = 0; r < k; ++r) {
        sum[r] += p[r];
        for (std::size_t c = 0; c < k; ++c) cross(r, c) += p[r] * p[c];
      }
    }
    const double n = static_cast<double>(opt.samples);
    for (std::size_t r = 0; r < k; ++r) {
      worst = std::max(worst, std::abs(sum[r] / n - mom.mean[r]));
      for (std::size_t c = 0; c < k; ++c) {
        const double cov = cross(r, c) / n - (sum[r] / n) * (sum[c] / n);
        worst = std::max(worst, std::abs(cov - mom.covariance(r, c)));
      }
    }
  }
  return Finish("dirichlet_moments", worst, opt.dirichlet_moment_tol,
                worst <= opt.dirichlet_moment_tol, {{"samples", opt.samples}});
}

TheoryReport RunTheoryChecks(const TheoryOptions& opt) {
  opt.Validate();
  using CheckFn = TheoryCheck (*)(const TheoryOptions&);
  const std::vector<CheckFn> fns = {
      CheckGradientFiniteDifference,  CheckGradientSandwich,
      CheckAccelerationMonotonicity,  CheckCurvatureSigns,
      CheckConvexLowerBound,          CheckConcaveUpperBound,
      CheckGaussianAdvantage,         CheckAdvantageDecreasesWithMemberSpread,
      CheckDeltaMethodVariance,       CheckDirichletVarianceOrdering,
      CheckDirichletMoments};
  TheoryReport report;
  report.seed = opt.seed;
  report.samples = opt.samples;
  report.checks.resize(fns.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(opt.jobs, fns.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < fns.size(); i = next++) report.checks[i] = fns[i](opt);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return report;
}

}  // namespace ccl
