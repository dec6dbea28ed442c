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

// Small fully connected classifier with hand-written backpropagation and the
// SGD trainer used for target, shadow and baseline models.

#ifndef CCL_NNET_H_
#define CCL_NNET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ccl/data.h"
#include "ccl/losses.h"
#include "ccl/numerics.h"

namespace ccl {

enum class Activation { kRelu, kTanh };

std::string ActivationName(Activation act);
Activation ParseActivation(const std::string& name);

struct DenseLayer {
  Mat weights;  // out x in
  Vec bias;     // out

  bool operator==(const DenseLayer& other) const = default;
};

class Network {
 public:
  // Fan-in scaled uniform initialisation, bound sqrt(6 / fan_in); biases 0.
  Network(std::vector<std::size_t> layer_sizes, Activation activation,
          double dropout, RngStream& init_rng);
  // All parameters zero.
  static Network Zeros(std::vector<std::size_t> layer_sizes, Activation activation,
                       double dropout = 0.0);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  Activation activation() const { return activation_; }
  // Applied at train time to the input of the last layer.
  double dropout() const { return dropout_; }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  // Invalidates outstanding forward caches.
  std::vector<DenseLayer>& mutable_layers() {
    ++version_;
    return layers_;
  }
  std::uint64_t version() const { return version_; }
  std::size_t ParameterCount() const;
  bool AllFinite() const;

  // Parameter equality; ignores the version counter.
  bool SameParameters(const Network& other) const;

 private:
  Network(std::vector<std::size_t> layer_sizes, Activation activation, double dropout);

  std::vector<std::size_t> sizes_;
  Activation activation_;
  double dropout_;
  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 0;
};

class StaleCacheError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ForwardCache {
  std::uint64_t version = 0;
  std::vector<Mat> inputs;  // input of every layer, after dropout
  std::vector<Mat> pre;     // pre-activations of every hidden layer
  Mat dropout_mask;         // empty when dropout was not applied
};

struct BatchForward {
  Mat logits;  // B x K
  ForwardCache cache;
};

struct ForwardResult {
  Vec logits;
  ForwardCache cache;
};

// rng is required only when train is true and the network uses dropout.
BatchForward ForwardBatch(const Network& net, const Mat& xs, bool train,
                          RngStream* rng = nullptr);
ForwardResult Forward(const Network& net, std::span<const double> x, bool train,
                      RngStream* rng = nullptr);

struct ParamGrads {
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  static ParamGrads ZerosLike(const Network& net);
};

// grad_logits is B x K, one row per cached sample.
ParamGrads BackwardBatch(const Network& net, const ForwardCache& cache,
                         const Mat& grad_logits);
ParamGrads Backward(const Network& net, const ForwardCache& cache,
                    std::span<const double> grad_logits);

// Adds lambda * w to every parameter gradient (L2 coupled to the gradient).
void AddWeightDecay(const Network& net, double lambda, ParamGrads& grads);

class SgdMomentum {
 public:
  SgdMomentum(const Network& net, double momentum);
  // v = momentum * v + g; w -= lr * v.
  void Step(Network& net, const ParamGrads& grads, double lr);

 private:
  double momentum_;
  ParamGrads velocity_;
};

struct NoDefense {};
struct RelaxLossDefense {
  double threshold = 0.0;  // ascend while the batch mean CE is below this
};
struct EarlyStopDefense {
  std::vector<std::size_t> checkpoint_epochs;
};
using Defense = std::variant<NoDefense, RelaxLossDefense, EarlyStopDefense>;

std::string DefenseName(const Defense& defense);

struct TrainConfig {
  TrainingLoss loss = LossSpec::CrossEntropy();
  std::size_t epochs = 120;
  std::size_t batch_size = 128;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<std::size_t> milestones = {50, 100};
  double lr_drop_factor = 10.0;
  std::uint64_t seed = 0;
  Defense defense = NoDefense{};

  void Validate() const;
  // Epochs are numbered from 1; the rate drops once for every milestone m
  // with m < epoch.
  double LearningRateAt(std::size_t epoch) const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss_mean = 0.0;  // per-sample CE on the train set, eval mode
  double train_loss_var = 0.0;
  double objective_mean = 0.0;   // training objective on the train set
  double train_acc = 0.0;
  double test_acc = 0.0;
  double test_loss_mean = 0.0;
  double test_loss_var = 0.0;
  double confidence_mean = 0.0;  // p_y on the train set
  double confidence_var = 0.0;
  std::size_t ascent_batches = 0;  // RelaxLoss sign flips this epoch
};

struct Checkpoint {
  std::size_t epoch;
  Network net;
};

struct TrainResult {
  Network net;
  std::vector<EpochStats> history;
  std::vector<Checkpoint> checkpoints;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shuffles once per epoch (last short batch kept) and draws dropout masks
// from streams derived from cfg.seed.
TrainResult Train(Network net, const Dataset& train, const Dataset& test,
                  const TrainConfig& cfg);

std::vector<Vec> PredictProbs(const Network& net, const Mat& xs);
Vec PredictProbs(const Network& net, std::span<const double> x);

// Accuracy and per-sample CE statistics of eval-mode predictions.
struct EvalSummary {
  double accuracy = 0.0;
  DistStats loss;
  DistStats confidence;
  double objective_mean = 0.0;
};
EvalSummary Evaluate(const Network& net, const Dataset& ds,
                     const TrainingLoss* objective = nullptr);

}  // namespace ccl

#endif  // CCL_NNET_H_
