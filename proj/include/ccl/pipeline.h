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

// End-to-end experiment orchestration: data -> split -> target and shadow
// training -> shadow-calibrated attacks -> report, plus alpha sweeps and
// baseline-defense grids.

#ifndef CCL_PIPELINE_H_
#define CCL_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccl/attacks.h"
#include "ccl/checkpoint.h"
#include "ccl/config.h"
#include "ccl/data.h"
#include "ccl/metrics_theory.h"
#include "ccl/nnet.h"

namespace ccl {

// Stream ids derived from the master seed.
inline constexpr std::uint64_t kDataStream = 1;
inline constexpr std::uint64_t kTargetStream = 2;
inline constexpr std::uint64_t kShadowStream = 3;
inline constexpr std::uint64_t kAttackStream = 4;
inline constexpr std::uint64_t kTheoryStream = 5;

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PreparedData {
  Dataset full;
  SplitPlan plan;
  Dataset target_train, target_test, shadow_train, shadow_test;
};

PreparedData PrepareData(const ExperimentConfig& cfg);
Dataset MakeDataset(const ExperimentConfig& cfg);

struct PipelineResult {
  AttackReport report;
  std::vector<EpochStats> target_history;
  std::vector<EpochStats> shadow_history;  // first shadow
  std::vector<AttackOutcome> outcomes;
  std::vector<QueryRecord> target_queries;
  EvalSummary final_train;  // target model on its training set
  std::optional<ModelCheckpoint> target_model;
};

// One result per early-stopping checkpoint when the defense is early_stop,
// otherwise exactly one result for the final model.
std::vector<PipelineResult> RunPipelineAll(const ExperimentConfig& cfg);
PipelineResult RunPipeline(const ExperimentConfig& cfg);

// Writes report.json, epochs.csv, attacks.csv and model.json; removes
// partial files on failure.
void WritePipelineOutputs(const PipelineResult& result, const std::filesystem::path& out_dir);

struct SweepRow {
  std::string knob;  // alpha, vanilla, relaxloss, dropout, ...
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  double test_acc = 0.0;
  double train_acc = 0.0;
  std::vector<std::pair<std::string, double>> advantages;
  double max_adv = 0.0;
  double p1 = 0.0;
  double loss_mean = 0.0;
  double loss_var = 0.0;
};

// alpha x seed grid (plus one vanilla CE row per seed when enabled).
std::vector<SweepRow> RunSweep(const ExperimentConfig& cfg, std::size_t jobs);
// One curve per non-empty baseline grid, for every sweep seed.
std::vector<SweepRow> RunBaselines(const ExperimentConfig& cfg, std::size_t jobs);

// Columns: knob,value,seed,status,test_acc,train_acc,adv_<attack>...,max_adv,
// p1,loss_mean,loss_var.
void WriteSweepCsv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace ccl

#endif  // CCL_PIPELINE_H_
