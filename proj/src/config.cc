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

#include "ccl/config.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ccl {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "run.seed",
      "data.source", "data.classes", "data.features", "data.per_class", "data.spread",
      "data.flip_prob", "data.csv_path", "data.has_header", "data.stratify",
      "model.hidden", "model.activation", "model.dropout",
      "train.epochs", "train.batch_size", "train.lr", "train.momentum",
      "train.weight_decay", "train.milestones", "train.lr_drop_factor",
      "loss.base", "loss.gamma", "loss.concave", "loss.alpha", "loss.scale",
      "loss.regularizer", "loss.reg_param",
      "defense.kind", "defense.threshold", "defense.checkpoints",
      "attack.metrics", "attack.nn", "attack.class_wise", "attack.shadows",
      "attack.nn_hidden", "attack.nn_epochs", "attack.nn_batch_size", "attack.nn_lr",
      "attack.nn_momentum", "attack.nn_weight_decay",
      "sweep.alphas", "sweep.seeds", "sweep.include_vanilla",
      "baselines.relaxloss", "baselines.dropout", "baselines.label_smoothing",
      "baselines.confidence_penalty", "baselines.early_stop",
  };
  return keys;
}

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ToDouble(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
}

std::uint64_t ToUnsigned(const std::string& key, const std::string& v) {
  try {
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    std::size_t used = 0;
    const unsigned long long u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a non-negative integer");
  }
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool Has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }
  std::string Str(const std::string& key, const std::string& fallback) const {
    return Trim(tree_.get<std::string>(key, fallback));
  }
  double Real(const std::string& key, double fallback) const {
    return Has(key) ? ToDouble(key, Str(key, "")) : fallback;
  }
  std::uint64_t Uint(const std::string& key, std::uint64_t fallback) const {
    return Has(key) ? ToUnsigned(key, Str(key, "")) : fallback;
  }
  bool Bool(const std::string& key, bool fallback) const {
    return Has(key) ? ToBool(key, Str(key, "")) : fallback;
  }
  std::vector<double> Reals(const std::string& key, std::vector<double> fallback) const {
    if (!Has(key)) return fallback;
    std::vector<double> out;
    for (const auto& item : SplitList(Str(key, ""))) out.push_back(ToDouble(key, item));
    return out;
  }
  template <typename T>
  std::vector<T> Uints(const std::string& key, std::vector<T> fallback) const {
    if (!Has(key)) return fallback;
    std::vector<T> out;
    for (const auto& item : SplitList(Str(key, ""))) {
      out.push_back(static_cast<T>(ToUnsigned(key, item)));
    }
    return out;
  }

 private:
  const pt::ptree& tree_;
};

std::string Num(double v) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << v;
  return out.str();
}

template <typename T>
std::string JoinList(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) {
      s += Num(xs[i]);
    } else {
      s += std::to_string(xs[i]);
    }
  }
  return s;
}

TrainingLoss BuildLoss(const Reader& r) {
  const std::string base_name = r.Str("loss.base", "ce");
  const double gamma = r.Real("loss.gamma", 2.0);
  const std::string concave_name = r.Str("loss.concave", "none");
  const double alpha = r.Real("loss.alpha", 1.0);
  const double scale = r.Real("loss.scale", 1.0);
  const std::string reg = r.Str("loss.regularizer", "none");
  const double reg_param = r.Real("loss.reg_param", 0.0);

  if (reg != "none") {
    if (base_name != "ce" || concave_name != "none") {
      throw ConfigError("loss.regularizer requires base = ce and concave = none");
    }
    if (reg == "label_smoothing") return BaselineLoss::LabelSmoothing(reg_param);
    if (reg == "confidence_penalty") return BaselineLoss::ConfidencePenalty(reg_param);
    throw ConfigError("loss.regularizer: unknown value '" + reg + "'");
  }

  ConvexBase base = ConvexBase::CrossEntropy();
  if (base_name == "focal") {
    base = ConvexBase::Focal(gamma);
  } else if (base_name != "ce") {
    throw ConfigError("loss.base: unknown value '" + base_name + "'");
  }
  std::optional<ConcaveTerm> concave;
  if (concave_name == "cel") {
    concave = ConcaveTerm::Exponential();
  } else if (concave_name == "cql") {
    concave = ConcaveTerm::Quadratic();
  } else if (concave_name != "none") {
    throw ConfigError("loss.concave: unknown value '" + concave_name + "'");
  }
  return LossSpec(base, std::move(concave), alpha, scale);
}

}  // namespace

void ExperimentConfig::Validate() const {
  try {
    train.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (data.source != "blobs" && data.source != "binary" && data.source != "csv") {
    throw ConfigError("data.source must be blobs, binary or csv");
  }
  if (data.source == "csv" && data.csv_path.empty()) {
    throw ConfigError("data.csv_path is required when data.source = csv");
  }
  if (!(model.dropout >= 0.0 && model.dropout < 1.0)) {
    throw ConfigError("model.dropout must lie in [0, 1)");
  }
  if (attack.shadows == 0) throw ConfigError("attack.shadows must be >= 1");
  if (attack.suite.metrics.empty() && !attack.suite.nn_attack) {
    throw ConfigError("attack: at least one attack must be enabled");
  }
  for (double a : sweep.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("sweep.alphas must lie in [0, 1]");
  }
  for (double t : baselines.relaxloss) {
    if (!(t >= 0.0)) throw ConfigError("baselines.relaxloss thresholds must be >= 0");
  }
  for (double d : baselines.dropout) {
    if (!(d >= 0.0 && d < 1.0)) throw ConfigError("baselines.dropout must lie in [0, 1)");
  }
  for (double s : baselines.label_smoothing) {
    if (!(s >= 0.0 && s < 1.0)) {
      throw ConfigError("baselines.label_smoothing must lie in [0, 1)");
    }
  }
  for (double b : baselines.confidence_penalty) {
    if (!(b >= 0.0)) throw ConfigError("baselines.confidence_penalty must be >= 0");
  }
  for (std::size_t e : baselines.early_stop) {
    if (e == 0 || e > train.epochs) {
      throw ConfigError("baselines.early_stop epochs must lie in [1, train.epochs]");
    }
  }
}

ExperimentConfig ParseConfig(std::string_view ini_text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(ini_text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!KnownKeys().contains(full)) throw ConfigError("config: unknown key '" + full + "'");
    }
  }

  const Reader r(tree);
  ExperimentConfig cfg;
  try {
    cfg.seed = r.Uint("run.seed", cfg.seed);

    DataConfig& d = cfg.data;
    d.source = r.Str("data.source", d.source);
    d.classes = r.Uint("data.classes", d.classes);
    d.features = r.Uint("data.features", d.features);
    d.per_class = r.Uint("data.per_class", d.per_class);
    d.spread = r.Real("data.spread", d.spread);
    d.flip_prob = r.Real("data.flip_prob", d.flip_prob);
    d.csv_path = r.Str("data.csv_path", "");
    d.has_header = r.Bool("data.has_header", d.has_header);
    d.stratify = r.Bool("data.stratify", d.stratify);

    ModelConfig& m = cfg.model;
    m.hidden = r.Uints<std::size_t>("model.hidden", m.hidden);
    m.activation = ParseActivation(r.Str("model.activation", "relu"));
    m.dropout = r.Real("model.dropout", m.dropout);

    TrainConfig& t = cfg.train;
    t.epochs = r.Uint("train.epochs", t.epochs);
    t.batch_size = r.Uint("train.batch_size", t.batch_size);
    t.lr = r.Real("train.lr", t.lr);
    t.momentum = r.Real("train.momentum", t.momentum);
    t.weight_decay = r.Real("train.weight_decay", t.weight_decay);
    t.milestones = r.Uints<std::size_t>("train.milestones", t.milestones);
    t.lr_drop_factor = r.Real("train.lr_drop_factor", t.lr_drop_factor);
    t.loss = BuildLoss(r);

    const std::string defense = r.Str("defense.kind", "none");
    if (defense == "relaxloss") {
      t.defense = RelaxLossDefense{r.Real("defense.threshold", 0.0)};
    } else if (defense == "early_stop") {
      t.defense = EarlyStopDefense{r.Uints<std::size_t>("defense.checkpoints", {})};
    } else if (defense == "none") {
      t.defense = NoDefense{};
    } else {
      throw ConfigError("defense.kind: unknown value '" + defense + "'");
    }

    AttackConfig& a = cfg.attack;
    if (r.Has("attack.metrics")) {
      a.suite.metrics.clear();
      for (const auto& name : SplitList(r.Str("attack.metrics", ""))) {
        a.suite.metrics.push_back(ParseMetric(name));
      }
    }
    a.suite.nn_attack = r.Bool("attack.nn", a.suite.nn_attack);
    a.suite.class_wise = r.Bool("attack.class_wise", a.suite.class_wise);
    a.shadows = r.Uint("attack.shadows", a.shadows);
    a.suite.nn.hidden = r.Uint("attack.nn_hidden", a.suite.nn.hidden);
    a.suite.nn.epochs = r.Uint("attack.nn_epochs", a.suite.nn.epochs);
    a.suite.nn.batch_size = r.Uint("attack.nn_batch_size", a.suite.nn.batch_size);
    a.suite.nn.lr = r.Real("attack.nn_lr", a.suite.nn.lr);
    a.suite.nn.momentum = r.Real("attack.nn_momentum", a.suite.nn.momentum);
    a.suite.nn.weight_decay = r.Real("attack.nn_weight_decay", a.suite.nn.weight_decay);

    SweepConfig& s = cfg.sweep;
    s.alphas = r.Reals("sweep.alphas", s.alphas);
    s.seeds = r.Uints<std::uint64_t>("sweep.seeds", s.seeds);
    s.include_vanilla = r.Bool("sweep.include_vanilla", s.include_vanilla);

    BaselineConfig& b = cfg.baselines;
    b.relaxloss = r.Reals("baselines.relaxloss", b.relaxloss);
    b.dropout = r.Reals("baselines.dropout", b.dropout);
    b.label_smoothing = r.Reals("baselines.label_smoothing", b.label_smoothing);
    b.confidence_penalty = r.Reals("baselines.confidence_penalty", b.confidence_penalty);
    b.early_stop = r.Uints<std::size_t>("baselines.early_stop", b.early_stop);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

std::string ToIni(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[run]\nseed = " << cfg.seed << "\n\n";

  const DataConfig& d = cfg.data;
  out << "[data]\nsource = " << d.source << "\nclasses = " << d.classes
      << "\nfeatures = " << d.features << "\nper_class = " << d.per_class
      << "\nspread = " << Num(d.spread) << "\nflip_prob = " << Num(d.flip_prob)
      << "\ncsv_path = " << d.csv_path.string()
      << "\nhas_header = " << (d.has_header ? "true" : "false")
      << "\nstratify = " << (d.stratify ? "true" : "false") << "\n\n";

  out << "[model]\nhidden = " << JoinList(cfg.model.hidden)
      << "\nactivation = " << ActivationName(cfg.model.activation)
      << "\ndropout = " << Num(cfg.model.dropout) << "\n\n";

  const TrainConfig& t = cfg.train;
  out << "[train]\nepochs = " << t.epochs << "\nbatch_size = " << t.batch_size
      << "\nlr = " << Num(t.lr) << "\nmomentum = " << Num(t.momentum)
      << "\nweight_decay = " << Num(t.weight_decay)
      << "\nmilestones = " << JoinList(t.milestones)
      << "\nlr_drop_factor = " << Num(t.lr_drop_factor) << "\n\n";

  out << "[loss]\n";
  if (const auto* spec = std::get_if<LossSpec>(&t.loss)) {
    const bool focal = spec->base().kind() == ConvexKind::kFocal;
    out << "base = " << (focal ? "focal" : "ce") << "\n";
    if (focal) out << "gamma = " << Num(spec->base().gamma()) << "\n";
    out << "concave = " << (spec->concave() ? spec->concave()->name() : "none")
        << "\nalpha = " << Num(spec->alpha()) << "\nscale = " << Num(spec->scale())
        << "\nregularizer = none\n\n";
  } else {
    const auto& bl = std::get<BaselineLoss>(t.loss);
    out << "base = ce\nconcave = none\nregularizer = "
        << (bl.kind == BaselineKind::kLabelSmoothing ? "label_smoothing" : "confidence_penalty")
        << "\nreg_param = " << Num(bl.param) << "\n\n";
  }

  out << "[defense]\nkind = " << DefenseName(t.defense) << "\n";
  if (const auto* rl = std::get_if<RelaxLossDefense>(&t.defense)) {
    out << "threshold = " << Num(rl->threshold) << "\n";
  } else if (const auto* es = std::get_if<EarlyStopDefense>(&t.defense)) {
    out << "checkpoints = " << JoinList(es->checkpoint_epochs) << "\n";
  }
  out << "\n";

  const AttackConfig& a = cfg.attack;
  std::vector<std::string> metric_names;
  for (MetricKind m : a.suite.metrics) metric_names.push_back(MetricName(m));
  out << "[attack]\nmetrics = ";
  for (std::size_t i = 0; i < metric_names.size(); ++i) out << (i ? "," : "") << metric_names[i];
  out << "\nnn = " << (a.suite.nn_attack ? "true" : "false")
      << "\nclass_wise = " << (a.suite.class_wise ? "true" : "false")
      << "\nshadows = " << a.shadows << "\nnn_hidden = " << a.suite.nn.hidden
      << "\nnn_epochs = " << a.suite.nn.epochs << "\nnn_batch_size = " << a.suite.nn.batch_size
      << "\nnn_lr = " << Num(a.suite.nn.lr) << "\nnn_momentum = " << Num(a.suite.nn.momentum)
      << "\nnn_weight_decay = " << Num(a.suite.nn.weight_decay) << "\n\n";

  out << "[sweep]\nalphas = " << JoinList(cfg.sweep.alphas)
      << "\nseeds = " << JoinList(cfg.sweep.seeds)
      << "\ninclude_vanilla = " << (cfg.sweep.include_vanilla ? "true" : "false") << "\n\n";

  const BaselineConfig& b = cfg.baselines;
  out << "[baselines]\nrelaxloss = " << JoinList(b.relaxloss)
      << "\ndropout = " << JoinList(b.dropout)
      << "\nlabel_smoothing = " << JoinList(b.label_smoothing)
      << "\nconfidence_penalty = " << JoinList(b.confidence_penalty)
      << "\nearly_stop = " << JoinList(b.early_stop) << "\n";
  return out.str();
}

}  // namespace ccl
