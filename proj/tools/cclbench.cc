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

// cclbench: command-line front end for data generation, single runs,
// alpha sweeps, baseline grids and the theory checks.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "ccl/checkpoint.h"
#include "ccl/config.h"
#include "ccl/pipeline.h"
#include "ccl/theory.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
};

void AddCommon(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config, "INI experiment config");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "master seed; overrides [run] seed");
  cmd->add_option("--out", flags.out, "output directory")->capture_default_str();
  cmd->add_option("--jobs", flags.jobs, "worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

ccl::ExperimentConfig Load(const CommonFlags& flags) {
  ccl::ExperimentConfig cfg;
  if (!flags.config.empty()) cfg = ccl::LoadConfig(flags.config);
  if (flags.seed) cfg.seed = *flags.seed;
  cfg.Validate();
  return cfg;
}

// With --seed the sweep runs that single seed instead of [sweep] seeds.
ccl::ExperimentConfig LoadForGrid(const CommonFlags& flags) {
  ccl::ExperimentConfig cfg = Load(flags);
  if (flags.seed) cfg.sweep.seeds = {*flags.seed};
  return cfg;
}

int GenData(const CommonFlags& flags) {
  const ccl::ExperimentConfig cfg = Load(flags);
  const ccl::PreparedData data = ccl::PrepareData(cfg);
  fs::create_directories(flags.out);
  ccl::WriteCsv(data.full, fs::path(flags.out) / "data.csv", true);
  nlohmann::ordered_json split;
  split["seed"] = data.plan.seed;
  const char* names[] = {"target_train", "target_test", "shadow_train", "shadow_test"};
  for (std::size_t i = 0; i < 4; ++i) split[names[i]] = data.plan.parts[i];
  std::ofstream(fs::path(flags.out) / "split.json") << split.dump(1) << "\n";
  std::cout << "wrote " << data.full.size() << " rows to " << flags.out << "\n";
  return kExitOk;
}

int Run(const CommonFlags& flags) {
  const ccl::ExperimentConfig cfg = Load(flags);
  const ccl::PipelineResult result = ccl::RunPipeline(cfg);
  ccl::WritePipelineOutputs(result, flags.out);
  std::cout << "test_acc " << result.report.test_acc << "  max_adv " << result.report.max_adv
            << "  p1 " << result.report.p1 << "\n";
  return kExitOk;
}

int Grid(const CommonFlags& flags, bool baselines) {
  const ccl::ExperimentConfig cfg = LoadForGrid(flags);
  const auto rows =
      baselines ? ccl::RunBaselines(cfg, flags.jobs) : ccl::RunSweep(cfg, flags.jobs);
  ccl::WriteSweepCsv(rows, fs::path(flags.out) / "sweep.csv");
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.status != "ok") {
      ++failed;
      std::cerr << r.knob << "=" << r.value << " seed " << r.seed << ": " << r.status << "\n";
    }
  }
  std::cout << rows.size() << " rows (" << failed << " failed) -> "
            << (fs::path(flags.out) / "sweep.csv").string() << "\n";
  return failed == 0 ? kExitOk : kExitCheckFailed;
}

int Theory(const CommonFlags& flags, std::size_t samples) {
  ccl::TheoryOptions opt;
  opt.seed = flags.seed.value_or(1);
  if (!flags.config.empty() && !flags.seed) opt.seed = ccl::LoadConfig(flags.config).seed;
  opt.samples = samples;
  opt.jobs = flags.jobs;
  const ccl::TheoryReport report = ccl::RunTheoryChecks(opt);
  fs::create_directories(flags.out);
  std::ofstream(fs::path(flags.out) / "theory.json") << report.ToJson().dump(2) << "\n";
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  statistic=" << c.statistic
              << " tol=" << c.tolerance << "\n";
  }
  return report.passed() ? kExitOk : kExitCheckFailed;
}

bool IsUsageError(const ccl::StageError& e) {
  return e.stage() == "config" || e.stage() == "data";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cclbench: convex-concave loss membership-privacy benchmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cclbench 1.0.0");

  CommonFlags flags;
  std::size_t samples = 1000000;
  auto* gen = app.add_subcommand("gen-data", "synthesize or load data and write the 4-way split");
  auto* run = app.add_subcommand("run", "train target and shadows, attack, write the report");
  auto* sweep = app.add_subcommand("sweep", "alpha sweep over [sweep] alphas x seeds");
  auto* base = app.add_subcommand("baselines", "baseline defense grids from [baselines]");
  auto* theory = app.add_subcommand("theory", "Monte-Carlo checks of the loss and attack theory");
  for (auto* cmd : {gen, run, sweep, base}) AddCommon(cmd, flags, true);
  AddCommon(theory, flags, false);
  theory->add_option("--samples", samples, "Monte-Carlo samples per distribution")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{100000}, std::size_t{1} << 40));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return GenData(flags);
    if (*run) return Run(flags);
    if (*sweep) return Grid(flags, false);
    if (*base) return Grid(flags, true);
    if (*theory) return Theory(flags, samples);
  } catch (const ccl::ConfigError& e) {
    std::cerr << "[config] " << e.what() << "\n";
    return kExitUsage;
  } catch (const ccl::StageError& e) {
    std::cerr << e.what() << "\n";
    return IsUsageError(e) ? kExitUsage : kExitCheckFailed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "[config] " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}
