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

// Exit-code and output contract of the cclbench binary.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

const fs::path kConfigs = CCL_CONFIG_DIR;

int Cli(const std::string& args) {
  const std::string cmd = std::string(CCLBENCH_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ccl_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

fs::path WriteIni(const fs::path& dir, const std::string& text) {
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.ini") << text;
  return dir / "cfg.ini";
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Cli(""), 2);
  EXPECT_EQ(Cli("frobnicate"), 2);
  EXPECT_EQ(Cli("run"), 2);
  EXPECT_EQ(Cli("run --config /nonexistent.ini"), 2);
  EXPECT_EQ(Cli("run --config " + (kConfigs / "smoke.ini").string() + " --jobs 0"), 2);
  EXPECT_EQ(Cli("theory --samples 10"), 2);
}

TEST(CliTest, BadConfigExitsTwo) {
  const fs::path dir = Scratch("badcfg");
  EXPECT_EQ(Cli("run --config " + WriteIni(dir, "[train]\nepochs = zero\n").string()), 2);
  EXPECT_EQ(Cli("sweep --config " + WriteIni(dir, "[loss]\nconcave = none\n").string()), 2);
  fs::remove_all(dir);
}

TEST(CliTest, MissingCsvExitsTwo) {
  const fs::path dir = Scratch("nocsv");
  const fs::path ini = WriteIni(dir, "[data]\nsource = csv\ncsv_path = /nonexistent/x.csv\n");
  EXPECT_EQ(Cli("run --config " + ini.string() + " --out " + (dir / "out").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "out" / "report.json"));
  fs::remove_all(dir);
}

TEST(CliTest, RunIsDeterministicAndGenDataWritesSplit) {
  const fs::path dir = Scratch("run");
  const std::string cfg = "--config " + (kConfigs / "smoke.ini").string();
  ASSERT_EQ(Cli("run " + cfg + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(Cli("run " + cfg + " --jobs 1 --out " + (dir / "b").string()), 0);
  EXPECT_EQ(Slurp(dir / "a" / "report.json"), Slurp(dir / "b" / "report.json"));
  ASSERT_EQ(Cli("run " + cfg + " --seed 99 --out " + (dir / "c").string()), 0);
  EXPECT_NE(Slurp(dir / "a" / "epochs.csv"), Slurp(dir / "c" / "epochs.csv"));

  ASSERT_EQ(Cli("gen-data " + cfg + " --out " + (dir / "g").string()), 0);
  const auto split = nlohmann::json::parse(Slurp(dir / "g" / "split.json"));
  std::size_t total = 0;
  for (const char* part : {"target_train", "target_test", "shadow_train", "shadow_test"}) {
    total += split[part].size();
  }
  EXPECT_EQ(total, 200u);
  fs::remove_all(dir);
}

TEST(CliTest, SweepAndBaselinesWriteCsv) {
  const fs::path dir = Scratch("sweep");
  const fs::path ini = WriteIni(dir,
                                "[data]\nclasses = 3\nfeatures = 4\nper_class = 20\n"
                                "[model]\nhidden = 8\n[train]\nepochs = 4\nmilestones = 2\n"
                                "[loss]\nconcave = cel\n[attack]\nnn = false\n"
                                "[sweep]\nalphas = 0.2, 0.8\nseeds = 1, 2\n"
                                "[baselines]\nlabel_smoothing = 0.1\nconfidence_penalty = 0.5\n");
  ASSERT_EQ(Cli("sweep --config " + ini.string() + " --out " + (dir / "s").string()), 0);
  std::ifstream sweep(dir / "s" / "sweep.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(sweep, line);) ++lines;
  EXPECT_EQ(lines, 1u + 2u * (2u + 1u));
  if (std::system("python3 -c 'import pandas, matplotlib' >/dev/null 2>&1") == 0) {
    const std::string plot = std::string("python3 ") + CCL_PLOT_SCRIPT + " " +
                             (dir / "s" / "sweep.csv").string() + " --out " +
                             (dir / "s" / "sweep.png").string();
    EXPECT_EQ(std::system(plot.c_str()), 0);
    EXPECT_GT(fs::file_size(dir / "s" / "sweep.png"), 0u);
  }
  ASSERT_EQ(Cli("baselines --config " + ini.string() + " --seed 3 --out " + (dir / "b").string()), 0);
  std::ifstream base(dir / "b" / "sweep.csv");
  lines = 0;
  for (std::string line; std::getline(base, line);) ++lines;
  EXPECT_EQ(lines, 1u + 3u);
  fs::remove_all(dir);
}

TEST(CliTest, TheoryWritesVerdict) {
  const fs::path dir = Scratch("theory");
  ASSERT_EQ(Cli("theory --samples 100000 --out " + dir.string()), 0);
  const auto j = nlohmann::json::parse(Slurp(dir / "theory.json"));
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["checks"].size(), 11u);
  fs::remove_all(dir);
}

}  // namespace
