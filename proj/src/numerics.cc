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

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>

namespace ccl {

double ClampProb(double p) { return std::clamp(p, kProbFloor, 1.0); }

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("Mat: data size " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

void RequireFinite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

Vec Softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("Softmax: empty input");
  RequireFinite(logits, "Softmax");
  const double max_z = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max_z);
    total += p[i];
  }
  // total >= 1 since the max entry contributes exp(0).
  for (double& v : p) v /= total;
  return p;
}

std::size_t Argmax(std::span<const double> xs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[best]) best = i;
  }
  return best;
}

double Entropy(std::span<const double> p) {
  double h = 0.0;
  for (double pk : p) {
    if (pk > 0.0) h -= pk * std::log(ClampProb(pk));
  }
  return h;
}

DistStats ComputeDistStats(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("ComputeDistStats: empty input");
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  double comp = 0.0;  // compensation term of the corrected two-pass formula
  for (double x : xs) {
    sq += (x - mean) * (x - mean);
    comp += x - mean;
  }
  const double n = static_cast<double>(xs.size());
  double var = (sq - comp * comp / n) / n;
  return {mean, std::max(var, 0.0), xs.size()};
}

void RunningStats::Add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

DistStats RunningStats::Get() const {
  if (n_ == 0) throw std::invalid_argument("RunningStats: no samples");
  return {mean_, std::max(m2_ / static_cast<double>(n_), 0.0), n_};
}

double Erf(double x) { return std::erf(x); }

double StdNormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double StdNormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("StdNormalQuantile: p must lie in (0, 1)");
  }
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream_id) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(splitmix(seed) ^ (stream_id * 0xd1b54a32d192ed03ULL));
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(MixSeed(seed, stream_id)) {}

double RngStream::Uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::Uniform(double lo, double hi) {
  return lo + (hi - lo) * Uniform();
}

double RngStream::Normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

double RngStream::Gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("Gamma: shape must be > 0");
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

double RngStream::Beta(double a, double b) {
  const double x = Gamma(a);
  const double y = Gamma(b);
  return x / (x + y);
}

Vec RngStream::Dirichlet(std::span<const double> alphas) {
  Vec out(alphas.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    out[i] = Gamma(alphas[i]);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

bool RngStream::Bernoulli(double p) { return Uniform() < p; }

std::size_t RngStream::UniformIndex(std::size_t n) {
  if (n == 0) throw std::invalid_argument("UniformIndex: n must be > 0");
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

RngStream RngStream::Fork(std::uint64_t child_id) const {
  return RngStream(MixSeed(seed_, stream_id_), child_id);
}

}  // namespace ccl
