// Copyright (c) 2026 The etts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "etts/config.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace etts {
namespace {

namespace fs = std::filesystem;

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ETTS_CLI_PATH) + " --log-level 2 " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::temp_dir("cli"));
    testing::tiny_config().save(*dir_ / "tiny.ini");
    ASSERT_EQ(run("gen-corpus --out " + (*dir_ / "data").string(), *dir_ / "gen.log"), 0);
    ASSERT_EQ(run("train --preset smoke --config " + (*dir_ / "tiny.ini").string() + " --manifest " +
                      (*dir_ / "data/manifest.tsv").string() + " --steps 2 --out " + (*dir_ / "run").string(),
                  *dir_ / "train.log"),
              0)
        << slurp(*dir_ / "train.log");
  }
  static void TearDownTestSuite() { delete dir_; }
  static fs::path dir() { return *dir_; }
  static fs::path manifest() { return *dir_ / "data/manifest.tsv"; }
  static fs::path checkpoint() { return *dir_ / "run/latest.pt"; }
  static fs::path* dir_;
};
fs::path* CliTest::dir_ = nullptr;

TEST_F(CliTest, GenCorpusIsReproducible) {
  ASSERT_EQ(run("gen-corpus --out " + (dir() / "data2").string(), dir() / "gen2.log"), 0);
  EXPECT_EQ(slurp(manifest()), slurp(dir() / "data2/manifest.tsv"));
  for (const auto& entry : fs::directory_iterator(dir() / "data"))
    EXPECT_EQ(slurp(entry.path()), slurp(dir() / "data2" / entry.path().filename())) << entry.path();
}

TEST_F(CliTest, TrainWritesRun) {
  EXPECT_TRUE(fs::exists(checkpoint()));
  EXPECT_TRUE(fs::exists(dir() / "run/losses.jsonl"));
  EXPECT_EQ(Config::load(dir() / "run/config.ini").hash(), testing::tiny_config().hash());
}

TEST_F(CliTest, SynthesizeWritesWav) {
  const auto out = dir() / "x.wav";
  ASSERT_EQ(run("synthesize --checkpoint " + checkpoint().string() + " --phonemes 3,7,12 --style 1 --out " +
                    out.string(),
                dir() / "synth.log"),
            0)
      << slurp(dir() / "synth.log");
  EXPECT_GT(fs::file_size(out), 44u);
}

TEST_F(CliTest, EvaluateWritesReport) {
  const auto out = dir() / "report";
  const auto& corpus = testing::shared_corpus();
  ASSERT_EQ(run("evaluate --manifest " + manifest().string() + " --checkpoint " + checkpoint().string() +
                    " --utterance " + corpus.records[0].id + " --out " + out.string(),
                dir() / "eval.log"),
            0)
      << slurp(dir() / "eval.log");
  const auto text = slurp(out / "report.txt");
  EXPECT_NE(text.find("GT (vocoder)"), std::string::npos);
  auto json = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(json["systems"].size(), 3u);
}

TEST_F(CliTest, PlotWritesFigures) {
  const auto& id = testing::shared_corpus().records[1].id;
  ASSERT_EQ(run("plot --manifest " + manifest().string() + " --checkpoint " + checkpoint().string() +
                    " --utterance " + id + " --out " + (dir() / "fig").string(),
                dir() / "plot.log"),
            0)
      << slurp(dir() / "plot.log");
  EXPECT_TRUE(fs::exists(dir() / "fig" / (id + "_pitch.png")));
  EXPECT_TRUE(fs::exists(dir() / "fig" / (id + "_spec.png")));
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run("synthesize --phonemes 1,2", dir() / "e1.log"), 1);
  EXPECT_EQ(run("train --bogus-flag", dir() / "e2.log"), 1);
  EXPECT_EQ(run("", dir() / "e3.log"), 1);
  EXPECT_EQ(run("evaluate --checkpoint /nonexistent.pt", dir() / "e4.log"), 1);
}

TEST_F(CliTest, RuntimeErrorsExitTwo) {
  EXPECT_EQ(run("synthesize --checkpoint " + checkpoint().string() + " --phonemes 1,2 --style 99 --out " +
                    (dir() / "bad.wav").string(),
                dir() / "r1.log"),
            2);
  EXPECT_NE(slurp(dir() / "r1.log").find("etts: error:"), std::string::npos);
  EXPECT_EQ(run("train --manifest " + (dir() / "nothing.tsv").string() + " --out " + (dir() / "r").string(),
                dir() / "r2.log"),
            2);
}

}  // namespace
}  // namespace etts
