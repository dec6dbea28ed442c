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

namespace ccl {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json LossToJson(const TrainingLoss& loss) {
  ordered_json j;
  if (const auto* spec = std::get_if<LossSpec>(&loss)) {
    const bool focal = spec->base().kind() == ConvexKind::kFocal;
    j["base"] = focal ? "focal" : "ce";
    j["gamma"] = spec->base().gamma();
    if (!spec->concave()) {
      j["concave"] = "none";
    } else if (spec->concave()->kind() == ConcaveKind::kCustom) {
      throw CheckpointError("checkpoint: custom concave terms cannot be serialized");
    } else {
      j["concave"] = spec->concave()->name();
    }
    j["alpha"] = spec->alpha();
    j["scale"] = spec->scale();
    j["regularizer"] = "none";
    j["reg_param"] = 0.0;
  } else {
    const auto& b = std::get<BaselineLoss>(loss);
    j["base"] = "ce";
    j["regularizer"] =
        b.kind == BaselineKind::kLabelSmoothing ? "label_smoothing" : "confidence_penalty";
    j["reg_param"] = b.param;
  }
  return j;
}

TrainingLoss LossFromJson(const json& j) {
  const std::string reg = j.value("regularizer", "none");
  if (reg == "label_smoothing") return BaselineLoss::LabelSmoothing(j.at("reg_param"));
  if (reg == "confidence_penalty") return BaselineLoss::ConfidencePenalty(j.at("reg_param"));
  if (reg != "none") throw CheckpointError("checkpoint: unknown regularizer " + reg);
  const std::string base = j.at("base");
  ConvexBase convex = ConvexBase::CrossEntropy();
  if (base == "focal") {
    convex = ConvexBase::Focal(j.at("gamma"));
  } else if (base != "ce") {
    throw CheckpointError("checkpoint: unknown base loss " + base);
  }
  const std::string concave = j.at("concave");
  std::optional<ConcaveTerm> term;
  if (concave == "cel") {
    term = ConcaveTerm::Exponential();
  } else if (concave == "cql") {
    term = ConcaveTerm::Quadratic();
  } else if (concave != "none") {
    throw CheckpointError("checkpoint: unknown concave term " + concave);
  }
  return LossSpec(convex, term, j.at("alpha"), j.at("scale"));
}

ordered_json DefenseToJson(const Defense& d) {
  ordered_json j;
  j["kind"] = DefenseName(d);
  if (const auto* r = std::get_if<RelaxLossDefense>(&d)) j["threshold"] = r->threshold;
  if (const auto* e = std::get_if<EarlyStopDefense>(&d)) j["checkpoints"] = e->checkpoint_epochs;
  return j;
}

Defense DefenseFromJson(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "none") return NoDefense{};
  if (kind == "relaxloss") return RelaxLossDefense{j.at("threshold").get<double>()};
  if (kind == "early_stop") {
    return EarlyStopDefense{j.at("checkpoints").get<std::vector<std::size_t>>()};
  }
  throw CheckpointError("checkpoint: unknown defense " + kind);
}

}  // namespace

ordered_json TrainConfigToJson(const TrainConfig& cfg) {
  ordered_json j;
  j["loss"] = LossToJson(cfg.loss);
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["lr"] = cfg.lr;
  j["momentum"] = cfg.momentum;
  j["weight_decay"] = cfg.weight_decay;
  j["milestones"] = cfg.milestones;
  j["lr_drop_factor"] = cfg.lr_drop_factor;
  j["seed"] = cfg.seed;
  j["defense"] = DefenseToJson(cfg.defense);
  return j;
}

TrainConfig TrainConfigFromJson(const json& j) {
  TrainConfig cfg;
  cfg.loss = LossFromJson(j.at("loss"));
  cfg.epochs = j.at("epochs");
  cfg.batch_size = j.at("batch_size");
  cfg.lr = j.at("lr");
  cfg.momentum = j.at("momentum");
  cfg.weight_decay = j.at("weight_decay");
  cfg.milestones = j.at("milestones").get<std::vector<std::size_t>>();
  cfg.lr_drop_factor = j.at("lr_drop_factor");
  cfg.seed = j.at("seed");
  cfg.defense = DefenseFromJson(j.at("defense"));
  return cfg;
}

ordered_json CheckpointToJson(const ModelCheckpoint& ckpt) {
  const Network& net = ckpt.net;
  ordered_json j;
  j["format"] = "cclbench-checkpoint";
  j["version"] = kCheckpointVersion;
  j["epoch"] = ckpt.epoch;
  j["layer_sizes"] = net.layer_sizes();
  j["activation"] = ActivationName(net.activation());
  j["dropout"] = net.dropout();
  j["layers"] = ordered_json::array();
  for (const DenseLayer& layer : net.layers()) {
    ordered_json weights = ordered_json::array();
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      const auto row = layer.weights.row(r);
      weights.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["layers"].push_back({{"weights", weights}, {"bias", layer.bias}});
  }
  j["train_config"] = TrainConfigToJson(ckpt.train);
  return j;
}

ModelCheckpoint CheckpointFromJson(const json& j) {
  try {
    if (j.value("format", "") != "cclbench-checkpoint") {
      throw CheckpointError("checkpoint: not a cclbench checkpoint");
    }
    const int version = j.at("version");
    if (version != kCheckpointVersion) {
      throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    Network net = Network::Zeros(sizes, ParseActivation(j.at("activation")), j.at("dropout"));
    const json& layers = j.at("layers");
    if (layers.size() + 1 != sizes.size()) {
      throw CheckpointError("checkpoint: layer count does not match layer_sizes");
    }
    auto& dst = net.mutable_layers();
    for (std::size_t l = 0; l < dst.size(); ++l) {
      const json& w = layers[l].at("weights");
      const auto bias = layers[l].at("bias").get<std::vector<double>>();
      if (w.size() != dst[l].weights.rows() || bias.size() != dst[l].bias.size()) {
        throw CheckpointError("checkpoint: layer " + std::to_string(l) + " has wrong shape");
      }
      for (std::size_t r = 0; r < w.size(); ++r) {
        const auto row = w[r].get<std::vector<double>>();
        if (row.size() != dst[l].weights.cols()) {
          throw CheckpointError("checkpoint: layer " + std::to_string(l) + " has wrong shape");
        }
        for (std::size_t c = 0; c < row.size(); ++c) dst[l].weights(r, c) = row[c];
      }
      dst[l].bias = bias;
    }
    if (!net.AllFinite()) throw CheckpointError("checkpoint: non-finite parameters");
    return {std::move(net), TrainConfigFromJson(j.at("train_config")), j.value("epoch", 0u)};
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out << CheckpointToJson(ckpt).dump(1) << "\n";
}

ModelCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
  return CheckpointFromJson(j);
}

}  // namespace ccl
