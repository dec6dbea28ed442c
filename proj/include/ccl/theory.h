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

// Monte-Carlo and randomized checks of the loss bounds, the Gaussian
// threshold-advantage model and the delta-method variance results.

#ifndef CCL_THEORY_H_
#define CCL_THEORY_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ccl/losses.h"
#include "json.hpp"

namespace ccl {

struct TheoryOptions {
  std::uint64_t seed = 1;
  std::size_t samples = 1000000;  // Monte-Carlo draws per distribution, >= 1e5
  std::size_t jobs = 1;
  std::vector<ConcaveTerm> concave_terms = {ConcaveTerm::Exponential(),
                                            ConcaveTerm::Quadratic()};
  std::vector<double> alphas = {0.0, 0.25, 0.5, 0.75, 1.0};
  double focal_gamma = 2.0;

  std::size_t gradient_inputs = 1000;
  double gradient_rel_tol = 1e-5;
  std::size_t sandwich_inputs = 100000;
  double sandwich_tol = 1e-9;
  std::size_t beta_distributions = 50;
  double moment_bound_tol = 1e-3;
  std::size_t gaussian_models = 50;
  double gaussian_tol = 3e-3;
  std::size_t sigma_grid = 20;
  // Dirichlet parameter vectors for the delta-method comparison.
  std::vector<std::vector<double>> delta_dirichlets = {
      {8.0, 4.0, 2.0}, {20.0, 10.0, 5.0}, {40.0, 20.0, 10.0}};
  double delta_rel_tol = 0.10;
  std::size_t ordering_pairs = 50;
  double dirichlet_moment_tol = 1e-3;

  void Validate() const;
};

struct TheoryCheck {
  std::string name;
  bool passed = false;
  double statistic = 0.0;  // worst observed value of the checked quantity
  double tolerance = 0.0;
  nlohmann::ordered_json detail;

  nlohmann::ordered_json ToJson() const;
};

struct TheoryReport {
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::vector<TheoryCheck> checks;

  bool passed() const;
  const TheoryCheck& Find(const std::string& name) const;
  // {seed, samples, passed, checks: [{name, passed, statistic, tolerance, detail}]}
  nlohmann::ordered_json ToJson() const;
};

// Individual checks. Each draws from its own stream of the options seed.
TheoryCheck CheckGradientFiniteDifference(const TheoryOptions& opt);
TheoryCheck CheckGradientSandwich(const TheoryOptions& opt);
TheoryCheck CheckAccelerationMonotonicity(const TheoryOptions& opt);
TheoryCheck CheckCurvatureSigns(const TheoryOptions& opt);
TheoryCheck CheckConvexLowerBound(const TheoryOptions& opt);
TheoryCheck CheckConcaveUpperBound(const TheoryOptions& opt);
TheoryCheck CheckGaussianAdvantage(const TheoryOptions& opt);
TheoryCheck CheckAdvantageDecreasesWithMemberSpread(const TheoryOptions& opt);
TheoryCheck CheckDeltaMethodVariance(const TheoryOptions& opt);
TheoryCheck CheckDirichletVarianceOrdering(const TheoryOptions& opt);
TheoryCheck CheckDirichletMoments(const TheoryOptions& opt);

// Runs every check above, concurrently when opt.jobs > 1.
TheoryReport RunTheoryChecks(const TheoryOptions& opt);

}  // namespace ccl

#endif  // CCL_THEORY_H_
