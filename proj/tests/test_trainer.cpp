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
#include <torch/torch.h>

#include <fstream>
#include <regex>
#include <set>

#include "etts/error.hpp"
#include "etts/synthesizer.hpp"
#include "etts/trainer.hpp"
#include "test_util.hpp"

namespace etts {
namespace {

std::vector<torch::Tensor> snapshot(const std::vector<torch::Tensor>& params) {
  std::vector<torch::Tensor> out;
  for (const auto& p : params) out.push_back(p.detach().clone());
  return out;
}

bool any_changed(const std::vector<torch::Tensor>& before, const std::vector<torch::Tensor>& after) {
  for (std::size_t i = 0; i < before.size(); ++i)
    if (!torch::equal(before[i], after[i].detach())) return true;
  return false;
}

const std::vector<PreparedUtterance>& tiny_corpus() {
  static const auto corpus = prepare_corpus(testing::shared_corpus(), testing::tiny_config());
  return corpus;
}

TEST(Trainer, SegmentWindow) {
  auto w = segment_window(5, 32, 256);
  EXPECT_EQ(w.start, 5 * 256);
  EXPECT_EQ(w.length, 32 * 256);
}

TEST(Trainer, PreparedCorpusShapes) {
  const auto& corpus = tiny_corpus();
  ASSERT_EQ(corpus.size(), 8u);
  for (const auto& u : corpus) {
    const long frames = u.record.total_frames();
    EXPECT_EQ(u.audio.size(0), frames * 256);
    EXPECT_EQ(u.linear.size(2), frames);
    EXPECT_EQ(u.targets.pitch_hz.size(), u.record.durations.size());
  }
}

TEST(Trainer, SameSeedSameReports) {
  auto cfg = testing::tiny_config();
  Trainer a(cfg, tiny_corpus()), b(cfg, tiny_corpus());
  for (int i = 0; i < 2; ++i) EXPECT_EQ(a.train_step().to_json(), b.train_step().to_json());
  cfg.training.seed += 1;
  Trainer c(cfg, tiny_corpus());
  Trainer d(testing::tiny_config(), tiny_corpus());
  EXPECT_NE(c.train_step().to_json(), d.train_step().to_json());
}

TEST(Trainer, LossDecompositionIsExact) {
  auto cfg = testing::tiny_config();
  Trainer t(cfg, tiny_corpus());
  for (int i = 0; i < 2; ++i) {
    auto r = t.train_step();
    EXPECT_EQ(r.total_g, total_generator_loss(r, cfg.training));
    EXPECT_EQ(r.total_d, r.adv_d);
  }
}

TEST(Trainer, UpdatesEveryGroupAndSeparatesPhases) {
  Trainer t(testing::tiny_config(), tiny_corpus());
  auto groups = t.parameter_groups();
  ASSERT_EQ(groups.size(), 16u);
  std::vector<std::vector<torch::Tensor>> before;
  for (const auto& g : groups) before.push_back(snapshot(g.parameters));

  auto gen_params = [&] {
    auto p = t.synthesizer()->parameters();
    auto q = t.posterior()->parameters();
    p.insert(p.end(), q.begin(), q.end());
    return p;
  };
  auto gen_before = snapshot(gen_params());
  auto disc_before = snapshot(t.discriminators()->parameters());
  std::vector<torch::Tensor> disc_after_d;
  bool gen_changed_in_d = true, disc_changed_in_g = true;
  t.set_phase_hook([&](const std::string& phase) {
    if (phase == "discriminator") {
      gen_changed_in_d = any_changed(gen_before, gen_params());
      disc_after_d = snapshot(t.discriminators()->parameters());
    } else {
      disc_changed_in_g = any_changed(disc_after_d, t.discriminators()->parameters());
    }
  });
  t.train_step();
  EXPECT_FALSE(gen_changed_in_d);
  EXPECT_FALSE(disc_changed_in_g);
  EXPECT_TRUE(any_changed(disc_before, t.discriminators()->parameters()));
  for (std::size_t i = 0; i < groups.size(); ++i)
    EXPECT_TRUE(any_changed(before[i], groups[i].parameters)) << groups[i].name;
}

TEST(Trainer, CheckpointRoundTripIsBitExact) {
  auto cfg = testing::tiny_config();
  auto dir = testing::temp_dir("ckpt");
  Trainer a(cfg, tiny_corpus());
  a.train_step();
  a.save_checkpoint(dir / "a.pt");
  cfg.training.seed = 777;
  Trainer other(cfg, tiny_corpus());
  EXPECT_THROW(other.load_checkpoint(dir / "a.pt"), InvalidArgument);

  Trainer b(testing::tiny_config(), tiny_corpus());
  b.load_checkpoint(dir / "a.pt");
  EXPECT_EQ(b.step(), 1);
  auto pa = a.synthesizer()->named_parameters(), pb = b.synthesizer()->named_parameters();
  for (const auto& item : pa) EXPECT_TRUE(torch::equal(item.value(), pb[item.key()])) << item.key();
  auto da = a.discriminators()->named_parameters(), db = b.discriminators()->named_parameters();
  for (const auto& item : da) EXPECT_TRUE(torch::equal(item.value(), db[item.key()])) << item.key();
  auto qa = a.posterior()->named_parameters(), qb = b.posterior()->named_parameters();
  for (const auto& item : qa) EXPECT_TRUE(torch::equal(item.value(), qb[item.key()])) << item.key();
  EXPECT_EQ(a.train_step().to_json(), b.train_step().to_json());
  EXPECT_THROW(b.load_checkpoint(dir / "missing.pt"), IoError);
}

TEST(Trainer, TrainWritesLogsAndCheckpoints) {
  auto cfg = testing::tiny_config();
  auto dir = testing::temp_dir("train");
  TrainOptions opts;
  opts.out_dir = dir;
  int seen = 0;
  opts.on_step = [&](const LossReport&) { ++seen; };
  auto latest = train(cfg, testing::shared_corpus(), opts);
  EXPECT_EQ(seen, 4);
  EXPECT_TRUE(std::filesystem::exists(latest));
  EXPECT_TRUE(std::filesystem::exists(dir / "ckpt_0000002.pt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "ckpt_0000004.pt"));
  std::ifstream log(dir / "losses.jsonl");
  std::string line;
  long lines = 0;
  while (std::getline(log, line)) EXPECT_EQ(LossReport::from_json(line).step, lines++);
  EXPECT_EQ(lines, 4);
  EXPECT_EQ(read_checkpoint_config(latest).hash(), cfg.hash());
}

TEST(Trainer, RejectsCorpusShorterThanSegment) {
  auto cfg = testing::tiny_config();
  cfg.training.segment_frames = 100000;
  EXPECT_THROW(prepare_corpus(testing::shared_corpus(), cfg), InvalidArgument);
}

TEST(Synthesizer, NoiseZeroDeterministicAndLength) {
  auto cfg = testing::tiny_config();
  torch::manual_seed(1);
  SynthesizerNetwork net(cfg);
  net->eval();
  SynthesisRequest req;
  req.phoneme_ids = {1, 4, 9, 2};
  req.style_id = 2;
  req.noise_scale = 0.0;
  req.seed = 1;
  auto a = synthesize(net, req);
  req.seed = 99;
  auto b = synthesize(net, req);
  EXPECT_EQ(a.audio, b.audio);
  long total = 0;
  for (int d : a.durations) total += d;
  EXPECT_EQ(static_cast<long>(a.audio.size()), total * 256);

  req.durations = std::vector<int>{3, 1, 2, 5};
  auto c = synthesize(net, req);
  EXPECT_EQ(c.audio.size(), 11u * 256);
  req.style_id = cfg.model.encoder.n_styles;
  EXPECT_THROW(synthesize(net, req), InvalidArgument);
}

TEST(Synthesizer, LoadFromTrainingCheckpoint) {
  auto cfg = testing::tiny_config();
  auto dir = testing::temp_dir("synth_ckpt");
  Trainer t(cfg, tiny_corpus());
  t.save_checkpoint(dir / "c.pt");
  auto net = load_synthesizer(dir / "c.pt");
  auto pa = t.synthesizer()->named_parameters(), pb = net->named_parameters();
  for (const auto& item : pa) EXPECT_TRUE(torch::equal(item.value(), pb[item.key()])) << item.key();
  EXPECT_THROW(load_synthesizer(dir / "none.pt"), IoError);
}

// Follows quoted etts/ includes from the inference sources.
TEST(Synthesizer, InferencePathDoesNotIncludeTrainingModules) {
  const std::filesystem::path root = ETTS_SOURCE_DIR;
  std::set<std::string> seen;
  std::vector<std::filesystem::path> todo{root / "core/include/etts/synthesizer.hpp", root / "core/src/synthesizer.cpp"};
  const std::regex include_re(R"(#include\s+"etts/([a-z_]+\.hpp)\")");
  while (!todo.empty()) {
    auto path = todo.back();
    todo.pop_back();
    std::ifstream in(path);
    ASSERT_TRUE(in) << path;
    std::string line;
    while (std::getline(in, line)) {
      std::smatch m;
      if (std::regex_search(line, m, include_re) && seen.insert(m[1]).second)
        todo.push_back(root / "core/include/etts" / m[1].str());
    }
  }
  EXPECT_TRUE(seen.count("flow.hpp"));
  EXPECT_FALSE(seen.count("posterior_encoder.hpp"));
  EXPECT_FALSE(seen.count("discriminators.hpp"));
  EXPECT_FALSE(seen.count("trainer.hpp"));
  EXPECT_FALSE(seen.count("losses.hpp"));
}

}  // namespace
}  // namespace etts
