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

// Datasets: synthetic generators, CSV ingestion and the four-way
// target/shadow split.

#ifndef CCL_DATA_H_
#define CCL_DATA_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ccl/numerics.h"

namespace ccl {

struct Dataset {
  Mat features;  // N x d
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  std::string name;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  // Throws std::invalid_argument when an invariant is broken. Datasets used
  // for experiments need at least 4 rows; loaders accept smaller files.
  void Validate(std::size_t min_rows = 4) const;
  Dataset Subset(std::span<const std::size_t> indices) const;
};

// Gaussian clusters: class centres drawn from N(0, I), points at
// centre + spread * N(0, I).
Dataset SynthBlobs(std::size_t num_classes, std::size_t dim, std::size_t per_class,
                   double spread, std::uint64_t seed);

// Binary records: one Bernoulli(1/2) template per class, each bit of each
// record flipped independently with probability flip_prob.
Dataset SynthBinaryRecords(std::size_t num_classes, std::size_t dim,
                           std::size_t per_class, double flip_prob,
                           std::uint64_t seed);

// Rows are d comma-separated reals followed by an integer label. The
// number of classes is max label + 1.
Dataset LoadCsv(const std::filesystem::path& path, bool has_header);
void WriteCsv(const Dataset& ds, const std::filesystem::path& path, bool with_header);

enum class SplitRole : std::size_t {
  kTargetTrain = 0,
  kTargetTest = 1,
  kShadowTrain = 2,
  kShadowTest = 3,
};

struct SplitPlan {
  std::array<std::vector<std::size_t>, 4> parts;
  std::uint64_t seed = 0;

  const std::vector<std::size_t>& part(SplitRole role) const {
    return parts[static_cast<std::size_t>(role)];
  }
};

// Seeded shuffle, then contiguous quarters; the first N % 4 parts get one
// extra index. With stratify each class is shuffled and dealt separately.
SplitPlan Split4(const Dataset& ds, std::uint64_t seed, bool stratify = false);
SplitPlan Split4(std::size_t n, std::uint64_t seed);

}  // namespace ccl

#endif  // CCL_DATA_H_
