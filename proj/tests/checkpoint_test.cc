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

#include "ccl/checkpoint.h"

#include <fstream>

#include <gtest/gtest.h>

namespace ccl {
namespace {

ModelCheckpoint Sample() {
  RngStream rng(5, 1);
  ModelCheckpoint c{Network({4, 6, 3}, Activation::kTanh, 0.2, rng), TrainConfig{}, 17};
  c.train.loss = LossSpec(ConvexBase::Focal(1.5), ConcaveTerm::Quadratic(), 0.35, 2.0);
  c.train.milestones = {3, 9};
  c.train.seed = 123456789012345ULL;
  c.train.defense = EarlyStopDefense{{5, 17}};
  return c;
}

TEST(CheckpointTest, JsonRoundTripIsExact) {
  const ModelCheckpoint c = Sample();
  const ModelCheckpoint back = CheckpointFromJson(nlohmann::json::parse(CheckpointToJson(c).dump()));
  EXPECT_TRUE(back.net.SameParameters(c.net));
  EXPECT_EQ(back.net.layer_sizes(), c.net.layer_sizes());
  EXPECT_EQ(back.net.activation(), Activation::kTanh);
  EXPECT_DOUBLE_EQ(back.net.dropout(), 0.2);
  EXPECT_EQ(back.epoch, 17u);
  EXPECT_EQ(back.train.seed, c.train.seed);
  EXPECT_EQ(back.train.milestones, c.train.milestones);
  EXPECT_EQ(TrainingLossName(back.train.loss), TrainingLossName(c.train.loss));
  EXPECT_EQ(std::get<EarlyStopDefense>(back.train.defense).checkpoint_epochs,
            (std::vector<std::size_t>{5, 17}));
  EXPECT_EQ(TrainConfigToJson(back.train).dump(), TrainConfigToJson(c.train).dump());
}

TEST(CheckpointTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "ccl_ckpt_test.json";
  const ModelCheckpoint c = Sample();
  SaveCheckpoint(c, path);
  EXPECT_TRUE(LoadCheckpoint(path).net.SameParameters(c.net));
  std::filesystem::remove(path);
}

TEST(CheckpointTest, BaselineLossesSurvive) {
  TrainConfig t;
  t.loss = BaselineLoss::ConfidencePenalty(0.3);
  t.defense = RelaxLossDefense{0.8};
  const TrainConfig back = TrainConfigFromJson(nlohmann::json::parse(TrainConfigToJson(t).dump()));
  EXPECT_EQ(std::get<BaselineLoss>(back.loss).kind, BaselineKind::kConfidencePenalty);
  EXPECT_DOUBLE_EQ(std::get<RelaxLossDefense>(back.defense).threshold, 0.8);
}

TEST(CheckpointTest, RejectsCorruptInput) {
  auto j = nlohmann::json::parse(CheckpointToJson(Sample()).dump());
  auto wrong_version = j;
  wrong_version["version"] = kCheckpointVersion + 1;
  EXPECT_THROW(CheckpointFromJson(wrong_version), CheckpointError);
  auto wrong_format = j;
  wrong_format["format"] = "other";
  EXPECT_THROW(CheckpointFromJson(wrong_format), CheckpointError);
  auto bad_shape = j;
  bad_shape["layers"][0]["bias"].push_back(1.0);
  EXPECT_THROW(CheckpointFromJson(bad_shape), CheckpointError);
  auto missing = j;
  missing.erase("layers");
  EXPECT_THROW(CheckpointFromJson(missing), CheckpointError);
  EXPECT_THROW(LoadCheckpoint("/nonexistent/ckpt.json"), CheckpointError);
  const auto path = std::filesystem::temp_directory_path() / "ccl_ckpt_garbage.json";
  std::ofstream(path) << "{not json";
  EXPECT_THROW(LoadCheckpoint(path), CheckpointError);
  std::filesystem::remove(path);
}

TEST(CheckpointTest, CustomConcaveTermsCannotBeSaved) {
  ModelCheckpoint c = Sample();
  c.train.loss = LossSpec(ConvexBase::CrossEntropy(),
                          ConcaveTerm::Custom("odd", [](double p) { return -p; },
                                              [](double) { return -1.0; }),
                          0.5);
  EXPECT_THROW(CheckpointToJson(c), CheckpointError);
}

}  // namespace
}  // namespace ccl
