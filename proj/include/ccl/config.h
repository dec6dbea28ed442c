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

// Experiment configuration: a flat INI file with one section per module.
// See docs/config.md for every key and its default.

#ifndef CCL_CONFIG_H_
#define CCL_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccl/attacks.h"
#include "ccl/nnet.h"

namespace ccl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataConfig {
  std::string source = "blobs";  // blobs | binary | csv
  std::size_t classes = 5;
  std::size_t features = 20;
  std::size_t per_class = 400;
  double spread = 1.0;
  double flip_prob = 0.1;
  std::filesystem::path csv_path;
  bool has_header = true;
  bool stratify = false;
};

struct ModelConfig {
  std::vector<std::size_t> hidden = {64};
  Activation activation = Activation::kRelu;
  double dropout = 0.0;
};

struct AttackConfig {
  AttackSuiteConfig suite;
  std::size_t shadows = 1;
};

struct SweepConfig {
  std::vector<double> alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  bool include_vanilla = true;  // one plain-CE row per seed
};

struct BaselineConfig {
  std::vector<double> relaxloss;
  std::vector<double> dropout;
  std::vector<double> label_smoothing;
  std::vector<double> confidence_penalty;
  std::vector<std::size_t> early_stop;
};

// The shadow recipe is the target recipe by construction; only the derived
// seeds differ.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  AttackConfig attack;
  SweepConfig sweep;
  BaselineConfig baselines;

  void Validate() const;
};

ExperimentConfig ParseConfig(std::string_view ini_text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// Canonical INI rendering; ParseConfig(ToIni(cfg)) reproduces cfg.
std::string ToIni(const ExperimentConfig& cfg);

}  // namespace ccl

#endif  // CCL_CONFIG_H_
