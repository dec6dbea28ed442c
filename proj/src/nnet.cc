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

#include "ccl/nnet.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ccl {
namespace {

constexpr std::uint64_t kShuffleStream = 11;
constexpr std::uint64_t kDropoutStream = 12;

double Activate(Activation act, double x) {
  return act == Activation::kRelu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

// Derivative expressed through the pre-activation.
double ActivateGrad(Activation act, double pre) {
  if (act == Activation::kRelu) return pre > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(pre);
  return 1.0 - t * t;
}

// out = in * W^T + b, in is B x n_in, W is n_out x n_in.
Mat Affine(const Mat& in, const DenseLayer& layer) {
  const std::size_t batch = in.rows();
  const std::size_t n_out = layer.weights.rows();
  const std::size_t n_in = layer.weights.cols();
  Mat out(batch, n_out);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = in.row(b).data();
    double* o = out.row(b).data();
    for (std::size_t r = 0; r < n_out; ++r) {
      const double* w = layer.weights.row(r).data();
      double acc = layer.bias[r];
      for (std::size_t i = 0; i < n_in; ++i) acc += w[i] * x[i];
      o[r] = acc;
    }
  }
  return out;
}

}  // namespace

std::string ActivationName(Activation act) {
  return act == Activation::kRelu ? "relu" : "tanh";
}

Activation ParseActivation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

Network::Network(std::vector<std::size_t> layer_sizes, Activation activation,
                 double dropout)
    : sizes_(std::move(layer_sizes)), activation_(activation), dropout_(dropout) {
  if (sizes_.size() < 2) throw std::invalid_argument("Network: need at least 2 layer sizes");
  for (std::size_t s : sizes_) {
    if (s == 0) throw std::invalid_argument("Network: layer sizes must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("Network: dropout must lie in [0, 1)");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    layers_.push_back({Mat(sizes_[l + 1], sizes_[l]), Vec(sizes_[l + 1], 0.0)});
  }
}

Network::Network(std::vector<std::size_t> layer_sizes, Activation activation,
                 double dropout, RngStream& init_rng)
    : Network(std::move(layer_sizes), activation, dropout) {
  for (DenseLayer& layer : layers_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.weights.cols()));
    for (double& w : layer.weights.data()) w = init_rng.Uniform(-bound, bound);
  }
}

Network Network::Zeros(std::vector<std::size_t> layer_sizes, Activation activation,
                       double dropout) {
  return Network(std::move(layer_sizes), activation, dropout);
}

std::size_t Network::ParameterCount() const {
  std::size_t n = 0;
  for (const DenseLayer& layer : layers_) n += layer.weights.data().size() + layer.bias.size();
  return n;
}

bool Network::AllFinite() const {
  for (const DenseLayer& layer : layers_) {
    for (double w : layer.weights.data()) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

bool Network::SameParameters(const Network& other) const {
  return sizes_ == other.sizes_ && activation_ == other.activation_ &&
         dropout_ == other.dropout_ && layers_ == other.layers_;
}

BatchForward ForwardBatch(const Network& net, const Mat& xs, bool train, RngStream* rng) {
  if (xs.cols() != net.input_dim()) {
    std::ostringstream msg;
    msg << "Forward: input has " << xs.cols() << " features, network expects "
        << net.input_dim();
    throw std::invalid_argument(msg.str());
  }
  const auto& layers = net.layers();
  const bool use_dropout = train && net.dropout() > 0.0;
  if (use_dropout && rng == nullptr) {
    throw std::invalid_argument("Forward: dropout in train mode needs an rng");
  }

  BatchForward out;
  out.cache.version = net.version();
  Mat current = xs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const bool last = l + 1 == layers.size();
    if (last && use_dropout) {
      // Inverted dropout: keep with prob 1 - rate, scale kept units by 1/(1 - rate).
      const double keep = 1.0 - net.dropout();
      out.cache.dropout_mask = Mat(current.rows(), current.cols());
      auto mask = out.cache.dropout_mask.data();
      auto values = current.data();
      for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = rng->Uniform() < keep ? 1.0 / keep : 0.0;
        values[i] *= mask[i];
      }
    }
    Mat pre = Affine(current, layers[l]);
    out.cache.inputs.push_back(std::move(current));
    if (last) {
      out.logits = std::move(pre);
      break;
    }
    current = Mat(pre.rows(), pre.cols());
    auto src = pre.data();
    auto dst = current.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = Activate(net.activation(), src[i]);
    out.cache.pre.push_back(std::move(pre));
  }
  return out;
}

ForwardResult Forward(const Network& net, std::span<const double> x, bool train,
                      RngStream* rng) {
  Mat xs(1, x.size(), Vec(x.begin(), x.end()));
  BatchForward batch = ForwardBatch(net, xs, train, rng);
  auto row = batch.logits.row(0);
  return {Vec(row.begin(), row.end()), std::move(batch.cache)};
}

ParamGrads ParamGrads::ZerosLike(const Network& net) {
  ParamGrads g;
  for (const DenseLayer& layer : net.layers()) {
    g.weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    g.biases.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

ParamGrads BackwardBatch(const Network& net, const ForwardCache& cache,
                         const Mat& grad_logits) {
  if (cache.version != net.version() || cache.inputs.size() != net.layers().size()) {
    throw StaleCacheError("Backward: cache does not belong to the current parameters");
  }
  const auto& layers = net.layers();
  const std::size_t batch = cache.inputs.front().rows();
  if (grad_logits.rows() != batch || grad_logits.cols() != net.output_dim()) {
    throw std::invalid_argument("Backward: upstream gradient has the wrong shape");
  }

  ParamGrads grads = ParamGrads::ZerosLike(net);
  Mat upstream = grad_logits;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    const Mat& in = cache.inputs[l];
    const std::size_t n_out = layer.weights.rows();
    const std::size_t n_in = layer.weights.cols();
    Mat& gw = grads.weights[l];
    Vec& gb = grads.biases[l];
    const bool need_input_grad = l > 0;
    Mat d_in = need_input_grad ? Mat(batch, n_in) : Mat();
    for (std::size_t b = 0; b < batch; ++b) {
      const double* x = in.row(b).data();
      const double* g_row = upstream.row(b).data();
      for (std::size_t r = 0; r < n_out; ++r) {
        const double g = g_row[r];
        if (g == 0.0) continue;
        gb[r] += g;
        double* gw_row = gw.row(r).data();
        for (std::size_t i = 0; i < n_in; ++i) gw_row[i] += g * x[i];
        if (need_input_grad) {
          const double* w = layer.weights.row(r).data();
          double* d = d_in.row(b).data();
          for (std::size_t i = 0; i < n_in; ++i) d[i] += g * w[i];
        }
      }
    }
    if (!need_input_grad) break;
    if (l + 1 == layers.size() && cache.dropout_mask.rows() > 0) {
      auto d = d_in.data();
      auto mask = cache.dropout_mask.data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= mask[i];
    }
    auto d = d_in.data();
    auto pre = cache.pre[l - 1].data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= ActivateGrad(net.activation(), pre[i]);
    upstream = std::move(d_in);
  }
  return grads;
}

ParamGrads Backward(const Network& net, const ForwardCache& cache,
                    std::span<const double> grad_logits) {
  Mat g(1, grad_logits.size(), Vec(grad_logits.begin(), grad_logits.end()));
  return BackwardBatch(net, cache, g);
}

void AddWeightDecay(const Network& net, double lambda, ParamGrads& grads) {
  if (lambda == 0.0) return;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto w = layers[l].weights.data();
    auto g = grads.weights[l].data();
    for (std::size_t i = 0; i < w.size(); ++i) g[i] += lambda * w[i];
    for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
      grads.biases[l][i] += lambda * layers[l].bias[i];
    }
  }
}

SgdMomentum::SgdMomentum(const Network& net, double momentum)
    : momentum_(momentum), velocity_(ParamGrads::ZerosLike(net)) {}

void SgdMomentum::Step(Network& net, const ParamGrads& grads, double lr) {
  auto& layers = net.mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto w = layers[l].weights.data();
    auto g = grads.weights[l].data();
    auto v = velocity_.weights[l].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = momentum_ * v[i] + g[i];
      w[i] -= lr * v[i];
    }
    Vec& b = layers[l].bias;
    const Vec& gb = grads.biases[l];
    Vec& vb = velocity_.biases[l];
    for (std::size_t i = 0; i < b.size(); ++i) {
      vb[i] = momentum_ * vb[i] + gb[i];
      b[i] -= lr * vb[i];
    }
  }
}

std::string DefenseName(const Defense& defense) {
  if (std::holds_alternative<RelaxLossDefense>(defense)) return "relaxloss";
  if (std::holds_alternative<EarlyStopDefense>(defense)) return "early_stop";
  return "none";
}

void TrainConfig::Validate() const {
  if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be > 0");
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be > 0");
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("TrainConfig: lr must be > 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("TrainConfig: momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) {
    throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
  }
  if (!(lr_drop_factor > 0.0)) {
    throw std::invalid_argument("TrainConfig: lr_drop_factor must be > 0");
  }
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (milestones[i] >= epochs || (i > 0 && milestones[i] <= milestones[i - 1])) {
      throw std::invalid_argument(
          "TrainConfig: milestones must be strictly increasing and below epochs");
    }
  }
  if (const auto* es = std::get_if<EarlyStopDefense>(&defense)) {
    for (std::size_t e : es->checkpoint_epochs) {
      if (e == 0 || e > epochs) {
        throw std::invalid_argument("TrainConfig: checkpoint epoch out of range");
      }
    }
  }
}

double TrainConfig::LearningRateAt(std::size_t epoch) const {
  double rate = lr;
  for (std::size_t m : milestones) {
    if (m < epoch) rate /= lr_drop_factor;
  }
  return rate;
}

EvalSummary Evaluate(const Network& net, const Dataset& ds, const TrainingLoss* objective) {
  const BatchForward fwd = ForwardBatch(net, ds.features, /*train=*/false);
  std::vector<double> losses(ds.size());
  std::vector<double> confidence(ds.size());
  std::size_t correct = 0;
  double objective_sum = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Vec p = Softmax(fwd.logits.row(i));
    const std::size_t y = ds.labels[i];
    losses[i] = CrossEntropy(p, y);
    confidence[i] = p[y];
    if (Argmax(p) == y) ++correct;
    if (objective != nullptr) objective_sum += TrainingLossValue(*objective, p, y);
  }
  EvalSummary out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
  out.loss = ComputeDistStats(losses);
  out.confidence = ComputeDistStats(confidence);
  out.objective_mean =
      objective != nullptr ? objective_sum / static_cast<double>(ds.size()) : out.loss.mean;
  return out;
}

TrainResult Train(Network net, const Dataset& train, const Dataset& test,
                  const TrainConfig& cfg) {
  cfg.Validate();
  if (train.dim() != net.input_dim() || train.num_classes > net.output_dim()) {
    throw std::invalid_argument("Train: dataset shape does not match the network");
  }
  RngStream shuffle_rng(cfg.seed, kShuffleStream);
  RngStream dropout_rng(cfg.seed, kDropoutStream);
  SgdMomentum optimizer(net, cfg.momentum);
  const auto* relax = std::get_if<RelaxLossDefense>(&cfg.defense);
  const auto* early = std::get_if<EarlyStopDefense>(&cfg.defense);

  TrainResult result{net, {}, {}};
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = cfg.LearningRateAt(epoch);
    shuffle_rng.Shuffle(std::span<std::size_t>(order));
    std::size_t ascent_batches = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const std::size_t batch = idx.size();
      Mat xs(batch, train.dim());
      for (std::size_t b = 0; b < batch; ++b) {
        const auto src = train.features.row(idx[b]);
        std::copy(src.begin(), src.end(), xs.row(b).begin());
      }
      const BatchForward fwd = ForwardBatch(net, xs, /*train=*/true, &dropout_rng);

      Mat grad(batch, net.output_dim());
      double batch_ce = 0.0;
      const double inv_batch = 1.0 / static_cast<double>(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t y = train.labels[idx[b]];
        const auto z = fwd.logits.row(b);
        const bool finite =
            std::all_of(z.begin(), z.end(), [](double v) { return std::isfinite(v); });
        const double ce = finite ? CrossEntropy(Softmax(z), y) : std::nan("");
        if (!std::isfinite(ce)) {
          std::ostringstream msg;
          msg << "Train: non-finite loss at epoch " << epoch << ", sample " << idx[b]
              << " (" << TrainingLossName(cfg.loss) << ", lr " << lr << ")";
          throw TrainingDiverged(msg.str());
        }
        batch_ce += ce;
        const Vec g = TrainingLossGradLogits(cfg.loss, z, y);
        for (std::size_t k = 0; k < g.size(); ++k) grad(b, k) = g[k] * inv_batch;
      }
      batch_ce *= inv_batch;

      if (relax != nullptr && batch_ce < relax->threshold) {
        for (double& g : grad.data()) g = -g;
        ++ascent_batches;
      }
      ParamGrads grads = BackwardBatch(net, fwd.cache, grad);
      AddWeightDecay(net, cfg.weight_decay, grads);
      optimizer.Step(net, grads, lr);
    }
    if (!net.AllFinite()) {
      std::ostringstream msg;
      msg << "Train: non-finite parameters after epoch " << epoch << " ("
          << TrainingLossName(cfg.loss) << ", lr " << lr << ")";
      throw TrainingDiverged(msg.str());
    }

    const EvalSummary on_train = Evaluate(net, train, &cfg.loss);
    const EvalSummary on_test = Evaluate(net, test);
    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_loss_mean = on_train.loss.mean;
    stats.train_loss_var = on_train.loss.variance;
    stats.objective_mean = on_train.objective_mean;
    stats.train_acc = on_train.accuracy;
    stats.test_acc = on_test.accuracy;
    stats.test_loss_mean = on_test.loss.mean;
    stats.test_loss_var = on_test.loss.variance;
    stats.confidence_mean = on_train.confidence.mean;
    stats.confidence_var = on_train.confidence.variance;
    stats.ascent_batches = ascent_batches;
    result.history.push_back(stats);

    if (early != nullptr &&
        std::find(early->checkpoint_epochs.begin(), early->checkpoint_epochs.end(), epoch) !=
            early->checkpoint_epochs.end()) {
      result.checkpoints.push_back({epoch, net});
    }
  }
  result.net = std::move(net);
  return result;
}

std::vector<Vec> PredictProbs(const Network& net, const Mat& xs) {
  const BatchForward fwd = ForwardBatch(net, xs, /*train=*/false);
  std::vector<Vec> probs;
  probs.reserve(xs.rows());
  for (std::size_t i = 0; i < xs.rows(); ++i) probs.push_back(Softmax(fwd.logits.row(i)));
  return probs;
}

Vec PredictProbs(const Network& net, std::span<const double> x) {
  return Softmax(Forward(net, x, /*train=*/false).logits);
}

}  // namespace ccl
