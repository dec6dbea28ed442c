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

#include "ccl/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <thread>

namespace ccl {
namespace {

constexpr std::uint64_t kGeneratorSub = 1;
constexpr std::uint64_t kSplitSub = 2;
constexpr std::uint64_t kInitSub = 1;

std::vector<std::size_t> LayerSizes(const ExperimentConfig& cfg, const Dataset& ds) {
  std::vector<std::size_t> sizes{ds.dim()};
  sizes.insert(sizes.end(), cfg.model.hidden.begin(), cfg.model.hidden.end());
  sizes.push_back(ds.num_classes);
  return sizes;
}

std::uint64_t ShadowSeed(std::uint64_t master, std::size_t index) {
  const std::uint64_t base = MixSeed(master, kShadowStream);
  return index == 0 ? base : MixSeed(base, 100 + index);
}

TrainResult TrainOne(const ExperimentConfig& cfg, const Dataset& train, const Dataset& test,
                     std::uint64_t seed) {
  RngStream init(seed, kInitSub);
  Network net(LayerSizes(cfg, train), cfg.model.activation, cfg.model.dropout, init);
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  return Train(std::move(net), train, test, tc);
}

PipelineResult Attack(const ExperimentConfig& cfg, const PreparedData& data,
                      const Network& target, const std::vector<const Network*>& shadows) {
  PipelineResult result;
  result.target_queries = MakeQueries(data.target_train, data.target_test);
  const auto shadow_queries = MakeQueries(data.shadow_train, data.shadow_test);
  AttackSuiteConfig suite = cfg.attack.suite;
  suite.nn.seed = MixSeed(cfg.seed, kAttackStream);
  result.outcomes =
      RunAttackSuite(target, shadows, result.target_queries, shadow_queries, suite);

  std::vector<int> truth;
  truth.reserve(result.target_queries.size());
  for (const auto& q : result.target_queries) truth.push_back(q.member);
  result.final_train = Evaluate(target, data.target_train, &cfg.train.loss);
  const EvalSummary on_test = Evaluate(target, data.target_test);
  result.report =
      BuildAttackReport(result.final_train.accuracy, on_test.accuracy, result.outcomes, truth);
  return result;
}

template <typename Fn>
auto Stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string Num(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return out.str();
}

SweepRow RowFromResult(const PipelineResult& r) {
  SweepRow row;
  row.test_acc = r.report.test_acc;
  row.train_acc = r.report.train_acc;
  for (const auto& a : r.report.attacks) row.advantages.emplace_back(a.name, a.adv);
  row.max_adv = r.report.max_adv;
  row.p1 = r.report.p1;
  row.loss_mean = r.final_train.loss.mean;
  row.loss_var = r.final_train.loss.variance;
  return row;
}

struct SweepTask {
  std::string knob;
  double value;
  std::uint64_t seed;
  ExperimentConfig cfg;
};

std::vector<SweepRow> RunOne(const SweepTask& task) {
  std::vector<SweepRow> rows;
  try {
    const auto results = RunPipelineAll(task.cfg);
    const auto* es = std::get_if<EarlyStopDefense>(&task.cfg.train.defense);
    for (std::size_t i = 0; i < results.size(); ++i) {
      SweepRow row = RowFromResult(results[i]);
      row.knob = task.knob;
      row.value = es ? static_cast<double>(results[i].target_model->epoch) : task.value;
      row.seed = task.seed;
      rows.push_back(std::move(row));
    }
  } catch (const std::exception& e) {
    SweepRow row;
    row.knob = task.knob;
    row.value = task.value;
    row.seed = task.seed;
    row.status = std::string("error: ") + e.what();
    row.test_acc = row.train_acc = row.max_adv = row.p1 = row.loss_mean = row.loss_var =
        std::numeric_limits<double>::quiet_NaN();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> RunTasks(const std::vector<SweepTask>& tasks, std::size_t jobs) {
  std::vector<std::vector<SweepRow>> results(tasks.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) results[i] = RunOne(tasks[i]);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  std::vector<SweepRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

SweepTask Vanilla(const ExperimentConfig& base, std::uint64_t seed) {
  SweepTask t{"vanilla", std::numeric_limits<double>::quiet_NaN(), seed, base};
  t.cfg.seed = seed;
  t.cfg.train.loss = LossSpec::CrossEntropy();
  t.cfg.train.defense = NoDefense{};
  t.cfg.model.dropout = 0.0;
  return t;
}

}  // namespace

Dataset MakeDataset(const ExperimentConfig& cfg) {
  const DataConfig& d = cfg.data;
  const std::uint64_t seed = MixSeed(MixSeed(cfg.seed, kDataStream), kGeneratorSub);
  if (d.source == "blobs") return SynthBlobs(d.classes, d.features, d.per_class, d.spread, seed);
  if (d.source == "binary") {
    return SynthBinaryRecords(d.classes, d.features, d.per_class, d.flip_prob, seed);
  }
  if (d.source == "csv") return LoadCsv(d.csv_path, d.has_header);
  throw ConfigError("data.source: unknown value '" + d.source + "'");
}

PreparedData PrepareData(const ExperimentConfig& cfg) {
  return Stage("data", [&] {
    PreparedData data;
    data.full = MakeDataset(cfg);
    data.full.Validate();
    data.plan = Split4(data.full, MixSeed(MixSeed(cfg.seed, kDataStream), kSplitSub),
                       cfg.data.stratify);
    data.target_train = data.full.Subset(data.plan.part(SplitRole::kTargetTrain));
    data.target_test = data.full.Subset(data.plan.part(SplitRole::kTargetTest));
    data.shadow_train = data.full.Subset(data.plan.part(SplitRole::kShadowTrain));
    data.shadow_test = data.full.Subset(data.plan.part(SplitRole::kShadowTest));
    return data;
  });
}

std::vector<PipelineResult> RunPipelineAll(const ExperimentConfig& cfg) {
  Stage("config", [&] {
    cfg.Validate();
    return 0;
  });
  const PreparedData data = PrepareData(cfg);

  TrainConfig target_cfg = cfg.train;
  target_cfg.seed = MixSeed(cfg.seed, kTargetStream);
  const TrainResult target = Stage("train-target", [&] {
    return TrainOne(cfg, data.target_train, data.target_test, target_cfg.seed);
  });
  std::vector<TrainResult> shadows;
  Stage("train-shadow", [&] {
    for (std::size_t i = 0; i < cfg.attack.shadows; ++i) {
      shadows.push_back(
          TrainOne(cfg, data.shadow_train, data.shadow_test, ShadowSeed(cfg.seed, i)));
    }
    return 0;
  });

  return Stage("attack", [&] {
    std::vector<PipelineResult> results;
    if (std::holds_alternative<EarlyStopDefense>(cfg.train.defense)) {
      for (std::size_t c = 0; c < target.checkpoints.size(); ++c) {
        std::vector<const Network*> shadow_nets;
        for (const auto& s : shadows) shadow_nets.push_back(&s.checkpoints.at(c).net);
        PipelineResult r = Attack(cfg, data, target.checkpoints[c].net, shadow_nets);
        const std::size_t epoch = target.checkpoints[c].epoch;
        r.target_model = ModelCheckpoint{target.checkpoints[c].net, target_cfg, epoch};
        r.target_history.assign(target.history.begin(), target.history.begin() + epoch);
        r.shadow_history.assign(shadows.front().history.begin(),
                                shadows.front().history.begin() + epoch);
        results.push_back(std::move(r));
      }
      return results;
    }
    std::vector<const Network*> shadow_nets;
    for (const auto& s : shadows) shadow_nets.push_back(&s.net);
    PipelineResult r = Attack(cfg, data, target.net, shadow_nets);
    r.target_model = ModelCheckpoint{target.net, target_cfg, target.history.size()};
    r.target_history = target.history;
    r.shadow_history = shadows.front().history;
    results.push_back(std::move(r));
    return results;
  });
}

PipelineResult RunPipeline(const ExperimentConfig& cfg) {
  auto results = RunPipelineAll(cfg);
  if (std::holds_alternative<EarlyStopDefense>(cfg.train.defense)) {
    // The last checkpoint stands in for the early-stopped model.
    if (results.empty()) throw StageError("attack", "early_stop defense without checkpoints");
  }
  return std::move(results.back());
}

void WritePipelineOutputs(const PipelineResult& result, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const std::vector<fs::path> files = {out_dir / "report.json", out_dir / "epochs.csv",
                                       out_dir / "attacks.csv", out_dir / "model.json"};
  try {
    fs::create_directories(out_dir);
    {
      std::ofstream out(files[0]);
      if (!out) throw std::runtime_error("cannot write " + files[0].string());
      out << result.report.ToJson().dump(2) << "\n";
    }
    {
      std::ofstream out(files[1]);
      if (!out) throw std::runtime_error("cannot write " + files[1].string());
      out << "model,epoch,lr,train_loss_mean,train_loss_var,objective_mean,train_acc,"
             "test_acc,test_loss_mean,test_loss_var,confidence_mean,confidence_var,"
             "ascent_batches\n";
      for (const auto* h : {&result.target_history, &result.shadow_history}) {
        const char* model = h == &result.target_history ? "target" : "shadow";
        for (const EpochStats& s : *h) {
          out << model << "," << s.epoch << "," << Num(s.lr) << "," << Num(s.train_loss_mean)
              << "," << Num(s.train_loss_var) << "," << Num(s.objective_mean) << ","
              << Num(s.train_acc) << "," << Num(s.test_acc) << "," << Num(s.test_loss_mean)
              << "," << Num(s.test_loss_var) << "," << Num(s.confidence_mean) << ","
              << Num(s.confidence_var) << "," << s.ascent_batches << "\n";
        }
      }
    }
    WriteAttackPredictionsCsv(files[2], result.outcomes, result.target_queries);
    if (result.target_model) SaveCheckpoint(*result.target_model, files[3]);
  } catch (const std::exception& e) {
    std::error_code ignored;
    for (const auto& f : files) fs::remove(f, ignored);
    throw StageError("output", e.what());
  }
}

std::vector<SweepRow> RunSweep(const ExperimentConfig& cfg, std::size_t jobs) {
  const auto* spec = std::get_if<LossSpec>(&cfg.train.loss);
  if (spec == nullptr || !spec->concave()) {
    throw ConfigError("sweep: loss.concave must name a concave term (cel or cql)");
  }
  if (cfg.sweep.alphas.empty() || cfg.sweep.seeds.empty()) {
    throw ConfigError("sweep: alphas and seeds must be non-empty");
  }
  std::vector<SweepTask> tasks;
  for (std::uint64_t seed : cfg.sweep.seeds) {
    if (cfg.sweep.include_vanilla) tasks.push_back(Vanilla(cfg, seed));
    for (double alpha : cfg.sweep.alphas) {
      SweepTask t{"alpha", alpha, seed, cfg};
      t.cfg.seed = seed;
      t.cfg.train.loss = LossSpec(spec->base(), spec->concave(), alpha, spec->scale());
      tasks.push_back(std::move(t));
    }
  }
  return RunTasks(tasks, jobs);
}

std::vector<SweepRow> RunBaselines(const ExperimentConfig& cfg, std::size_t jobs) {
  const BaselineConfig& b = cfg.baselines;
  if (b.relaxloss.empty() && b.dropout.empty() && b.label_smoothing.empty() &&
      b.confidence_penalty.empty() && b.early_stop.empty()) {
    throw ConfigError("baselines: every grid is empty");
  }
  if (cfg.sweep.seeds.empty()) throw ConfigError("baselines: sweep.seeds must be non-empty");
  std::vector<SweepTask> tasks;
  for (std::uint64_t seed : cfg.sweep.seeds) {
    const SweepTask vanilla = Vanilla(cfg, seed);
    if (cfg.sweep.include_vanilla) tasks.push_back(vanilla);
    for (double t : b.relaxloss) {
      SweepTask task{"relaxloss", t, seed, vanilla.cfg};
      task.cfg.train.defense = RelaxLossDefense{t};
      tasks.push_back(std::move(task));
    }
    for (double p : b.dropout) {
      SweepTask task{"dropout", p, seed, vanilla.cfg};
      task.cfg.model.dropout = p;
      tasks.push_back(std::move(task));
    }
    for (double s : b.label_smoothing) {
      SweepTask task{"label_smoothing", s, seed, vanilla.cfg};
      task.cfg.train.loss = BaselineLoss::LabelSmoothing(s);
      tasks.push_back(std::move(task));
    }
    for (double beta : b.confidence_penalty) {
      SweepTask task{"confidence_penalty", beta, seed, vanilla.cfg};
      task.cfg.train.loss = BaselineLoss::ConfidencePenalty(beta);
      tasks.push_back(std::move(task));
    }
    if (!b.early_stop.empty()) {
      SweepTask task{"early_stop", 0.0, seed, vanilla.cfg};
      std::vector<std::size_t> epochs = b.early_stop;
      std::sort(epochs.begin(), epochs.end());
      epochs.erase(std::unique(epochs.begin(), epochs.end()), epochs.end());
      task.cfg.train.defense = EarlyStopDefense{epochs};
      tasks.push_back(std::move(task));
    }
  }
  return RunTasks(tasks, jobs);
}

void WriteSweepCsv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::vector<std::string> attack_names;
  for (const SweepRow& r : rows) {
    for (const auto& [name, adv] : r.advantages) {
      if (std::find(attack_names.begin(), attack_names.end(), name) == attack_names.end()) {
        attack_names.push_back(name);
      }
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw StageError("output", "cannot write " + path.string());
  out << "knob,value,seed,status,test_acc,train_acc";
  for (const auto& n : attack_names) out << ",adv_" << n;
  out << ",max_adv,p1,loss_mean,loss_var\n";
  for (const SweepRow& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.knob << "," << Num(r.value) << "," << r.seed << "," << status << ","
        << Num(r.test_acc) << "," << Num(r.train_acc);
    for (const auto& n : attack_names) {
      auto it = std::find_if(r.advantages.begin(), r.advantages.end(),
                             [&](const auto& a) { return a.first == n; });
      out << "," << (it == r.advantages.end() ? "" : Num(it->second));
    }
    out << "," << Num(r.max_adv) << "," << Num(r.p1) << "," << Num(r.loss_mean) << ","
        << Num(r.loss_var) << "\n";
  }
}

}  // namespace ccl
