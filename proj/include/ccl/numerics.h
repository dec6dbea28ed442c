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

// Dense numeric kernel shared by every other module: row-major matrices,
// a numerically stable softmax, seeded random streams and distribution
// statistics.

#ifndef CCL_NUMERICS_H_
#define CCL_NUMERICS_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ccl {

using Vec = std::vector<double>;

// Probabilities that feed a logarithm are clamped to [kProbFloor, 1].
inline constexpr double kProbFloor = 1e-12;

double ClampProb(double p);

// Row-major dense matrix with dimensions fixed at construction.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  Mat(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const Mat& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Throws std::invalid_argument when any entry is NaN or infinite.
void RequireFinite(std::span<const double> xs, const char* what);

// Softmax with max-subtraction. Output lies on the probability simplex.
Vec Softmax(std::span<const double> logits);

// Index of the largest entry; lowest index wins ties.
std::size_t Argmax(std::span<const double> xs);

// Shannon entropy in nats with clamped logarithms.
double Entropy(std::span<const double> p);

struct DistStats {
  double mean = 0.0;
  double variance = 0.0;  // population convention
  std::size_t count = 0;
};

// Two-pass population mean and variance. Throws on an empty input.
DistStats ComputeDistStats(std::span<const double> xs);

// Single-pass (Welford) accumulator; agrees with ComputeDistStats.
class RunningStats {
 public:
  void Add(double x);
  DistStats Get() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double Erf(double x);
double StdNormalCdf(double x);
// Inverse of StdNormalCdf on (0, 1).
double StdNormalQuantile(double p);

// Deterministic random stream keyed by (seed, stream_id). Streams with
// different ids are seeded through a splitmix64 mix of both values.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t NextU64() { return engine_(); }
  double Uniform();                     // [0, 1)
  double Uniform(double lo, double hi);
  double Normal();                      // N(0, 1)
  double Gamma(double shape);           // Gamma(shape, 1)
  double Beta(double a, double b);
  Vec Dirichlet(std::span<const double> alphas);
  bool Bernoulli(double p);
  std::size_t UniformIndex(std::size_t n);  // uniform on [0, n)

  template <typename T>
  void Shuffle(std::span<T> xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::size_t j = UniformIndex(i);
      std::swap(xs[i - 1], xs[j]);
    }
  }

  // Independent child stream; does not advance this stream.
  RngStream Fork(std::uint64_t child_id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace ccl

#endif  // CCL_NUMERICS_H_
