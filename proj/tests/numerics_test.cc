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

#include "ccl/numerics.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

namespace ccl {
namespace {

TEST(SoftmaxTest, KnownValues) {
  const Vec z = {1.0, 0.0, 0.0};
  const Vec p = Softmax(z);
  EXPECT_NEAR(p[0], 0.5761168847658291, 1e-12);
  EXPECT_NEAR(p[1], 0.2119415576170855, 1e-12);
  EXPECT_NEAR(p[2], 0.2119415576170855, 1e-12);
}

TEST(SoftmaxTest, ShiftInvariantAndStableForHugeLogits) {
  const Vec a = Softmax(std::vector<double>{3.0, 1.0, -2.0});
  const Vec b = Softmax(std::vector<double>{1003.0, 1001.0, 998.0});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
  const Vec c = Softmax(std::vector<double>{1000.0, 0.0});
  EXPECT_DOUBLE_EQ(c[0], 1.0);
  EXPECT_GE(c[1], 0.0);
}

TEST(SoftmaxTest, RandomInputsLandOnSimplex) {
  RngStream rng(3, 0);
  for (int t = 0; t < 200; ++t) {
    Vec z(2 + rng.UniformIndex(20));
    for (double& v : z) v = 30.0 * rng.Normal();
    const Vec p = Softmax(z);
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(SoftmaxTest, RejectsNonFinite) {
  EXPECT_THROW(Softmax(std::vector<double>{0.0, std::nan("")}), std::invalid_argument);
  EXPECT_THROW(Softmax(std::vector<double>{std::numeric_limits<double>::infinity(), 0.0}),
               std::invalid_argument);
  EXPECT_THROW(Softmax(std::vector<double>{}), std::invalid_argument);
}

TEST(ArgmaxTest, LowestIndexWinsTies) {
  EXPECT_EQ(Argmax(std::vector<double>{0.2, 0.4, 0.4}), 1u);
  EXPECT_EQ(Argmax(std::vector<double>{1.0, 1.0}), 0u);
}

TEST(EntropyTest, KnownValuesAndExtremes) {
  EXPECT_NEAR(Entropy(std::vector<double>{0.7, 0.2, 0.1}), 0.8018185525433373, 1e-12);
  EXPECT_NEAR(Entropy(std::vector<double>{1.0, 0.0, 0.0}), 0.0, 1e-10);
  EXPECT_NEAR(Entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}), std::log(4.0), 1e-14);
}

TEST(DistStatsTest, PopulationMoments) {
  const DistStats s = ComputeDistStats(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.variance, 1.25);
  EXPECT_EQ(s.count, 4u);
  EXPECT_THROW(ComputeDistStats(std::vector<double>{}), std::invalid_argument);
}

TEST(DistStatsTest, RunningStatsMatchesTwoPass) {
  RngStream rng(9, 1);
  std::vector<double> xs(5000);
  RunningStats running;
  for (double& x : xs) {
    x = 1e6 + rng.Normal();
    running.Add(x);
  }
  const DistStats a = ComputeDistStats(xs);
  const DistStats b = running.Get();
  EXPECT_NEAR(a.mean, b.mean, 1e-8);
  EXPECT_NEAR(a.variance, b.variance, 1e-8);
  EXPECT_GE(a.variance, 0.0);
}

TEST(NormalTest, CdfAndQuantile) {
  EXPECT_NEAR(StdNormalCdf(1.0), 0.8413447460685429, 1e-14);
  EXPECT_NEAR(StdNormalCdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(StdNormalCdf(-1.0) + StdNormalCdf(1.0), 1.0, 1e-15);
  EXPECT_NEAR(StdNormalQuantile(0.975), 1.959963984540054, 1e-12);
  for (double p : {1e-10, 0.01, 0.3, 0.5, 0.77, 0.999}) {
    EXPECT_NEAR(StdNormalCdf(StdNormalQuantile(p)), p, 1e-12 + 1e-10 * p);
  }
  EXPECT_NEAR(Erf(1.0), 0.8427007929497149, 1e-15);
}

TEST(RngStreamTest, DeterministicAndStreamSeparated) {
  RngStream a(42, 1), b(42, 1), c(42, 2);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs |= x != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(RngStreamTest, ForkDoesNotAdvanceParent) {
  RngStream a(5, 3), b(5, 3);
  RngStream child = a.Fork(1);
  (void)child.NextU64();
  EXPECT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngStreamTest, ShuffleIsPermutation) {
  RngStream rng(1, 1);
  std::vector<int> xs(100);
  std::iota(xs.begin(), xs.end(), 0);
  rng.Shuffle(std::span<int>(xs));
  std::set<int> seen(xs.begin(), xs.end());
  EXPECT_EQ(seen.size(), 100u);
}

TEST(RngStreamTest, DistributionMoments) {
  RngStream rng(11, 0);
  RunningStats u, n, beta;
  for (int i = 0; i < 200000; ++i) {
    u.Add(rng.Uniform());
    n.Add(rng.Normal());
    beta.Add(rng.Beta(2.0, 3.0));
  }
  EXPECT_NEAR(u.Get().mean, 0.5, 5e-3);
  EXPECT_NEAR(u.Get().variance, 1.0 / 12.0, 2e-3);
  EXPECT_NEAR(n.Get().mean, 0.0, 1e-2);
  EXPECT_NEAR(n.Get().variance, 1.0, 1e-2);
  EXPECT_NEAR(beta.Get().mean, 0.4, 5e-3);
  EXPECT_NEAR(beta.Get().variance, 0.04, 1e-3);
  const Vec d = rng.Dirichlet(std::vector<double>{1.0, 2.0, 3.0});
  EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-12);
}

TEST(MatTest, RowMajorLayout) {
  Mat m(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m(1, 0), 4.0);
  EXPECT_EQ(m.row(1)[2], 6.0);
  EXPECT_THROW(Mat(2, 2, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

}  // namespace
}  // namespace ccl
