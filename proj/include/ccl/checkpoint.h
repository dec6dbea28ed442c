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

// JSON model checkpoints: layer sizes, parameters and the training recipe.

#ifndef CCL_CHECKPOINT_H_
#define CCL_CHECKPOINT_H_

#include <filesystem>
#include <stdexcept>

#include "ccl/nnet.h"
#include "json.hpp"

namespace ccl {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelCheckpoint {
  Network net;
  TrainConfig train;
  std::size_t epoch = 0;
};

nlohmann::ordered_json TrainConfigToJson(const TrainConfig& cfg);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

nlohmann::ordered_json CheckpointToJson(const ModelCheckpoint& ckpt);
ModelCheckpoint CheckpointFromJson(const nlohmann::json& j);

void SaveCheckpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace ccl

#endif  // CCL_CHECKPOINT_H_
