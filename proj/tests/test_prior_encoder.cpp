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

#include <cmath>
#include <random>

#include "etts/error.hpp"
#include "etts/prior_encoder.hpp"
#include "test_util.hpp"

namespace etts {
namespace {

using testing::max_abs_diff;

EncoderConfig small_encoder() {
  EncoderConfig e;
  e.d_model = 16;
  e.d_style = 4;
  e.phoneme_blocks = 2;
  e.frame_blocks = 2;
  return e;
}

TEST(LengthRegulate, Example) {
  auto h = torch::tensor({1.0f, 2.0f}).reshape({1, 2, 1});
  auto out = length_regulate(h, std::vector<int>{2, 3});
  EXPECT_TRUE(torch::equal(out.reshape({-1}), torch::tensor({1.0f, 1.0f, 2.0f, 2.0f, 2.0f})));
}

TEST(LengthRegulate, UnitDurationsAreIdentity) {
  auto h = torch::randn({2, 7, 3});
  EXPECT_TRUE(torch::equal(length_regulate(h, std::vector<int>(7, 1)), h));
}

TEST(LengthRegulate, SumPreservedOnRandomCases) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> len(1, 30), dur(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> d(len(rng));
    long total = 0;
    for (auto& x : d) total += (x = dur(rng));
    auto out = length_regulate(torch::randn({1, static_cast<long>(d.size()), 2}), d);
    ASSERT_EQ(out.size(1), total);
  }
}

TEST(LengthRegulate, Errors) {
  auto h = torch::randn({1, 3, 2});
  EXPECT_THROW(length_regulate(h, std::vector<int>{1, 2}), InvalidArgument);
  EXPECT_THROW(length_regulate(h, std::vector<int>{1, 0, 2}), InvalidArgument);
}

TEST(SwishRnn, ScanMatchesScalarRecurrence) {
  torch::manual_seed(1);
  SwishRnn rnn(3);
  auto u = torch::randn({1, 6, 3});
  auto h = rnn->scan(u);
  auto r = rnn->recurrence_weight();
  for (int c = 0; c < 3; ++c) {
    double state = 0.0;
    const double rc = r[c].item<double>();
    for (int t = 0; t < 6; ++t) {
      const double a = u[0][t][c].item<double>() + rc * state;
      state = a / (1.0 + std::exp(-a));
      EXPECT_NEAR(h[0][t][c].item<double>(), state, 1e-5);
    }
  }
}

TEST(SwishRnn, ConstantInputConvergesMonotonically) {
  torch::manual_seed(2);
  SwishRnn rnn(4);
  auto h = rnn->scan(torch::full({1, 60, 4}, 0.7));
  for (int c = 0; c < 4; ++c) {
    auto seq = h.select(2, c).reshape({-1});
    // The scalar map h -> silu(0.7 + r h) has its fixed point at the limit.
    const double r = rnn->recurrence_weight()[c].item<double>();
    double fixed = 0.0;
    for (int i = 0; i < 10000; ++i) fixed = (0.7 + r * fixed) / (1.0 + std::exp(-(0.7 + r * fixed)));
    double prev_gap = std::abs(seq[0].item<double>() - fixed);
    for (int t = 1; t < 60; ++t) {
      const double gap = std::abs(seq[t].item<double>() - fixed);
      EXPECT_LE(gap, prev_gap + 1e-7);
      prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 1e-4);
  }
}

TEST(SwishRnnBlock, ShapeAndZeroInitIdentity) {
  SwishRnnBlock block(16, 2);
  for (long t : {1L, 5L, 23L}) {
    auto x = torch::randn({2, t, 16});
    EXPECT_EQ(block(x).sizes(), x.sizes());
  }
  block->zero_output_projections();
  auto x = torch::randn({1, 9, 16});
  EXPECT_LT(max_abs_diff(block(x), x), 1e-6);
}

TEST(PhonemeEncoder, SinglePhonemeAndBatchPermutation) {
  torch::manual_seed(3);
  auto cfg = small_encoder();
  PhonemeEncoder enc(cfg);
  enc->eval();
  auto style = torch::randn({2, cfg.d_style});
  EXPECT_EQ(enc(torch::tensor({{4L}}), style.narrow(0, 0, 1)).sizes(), (std::vector<long>{1, 1, 16}));

  auto ids = torch::randint(0, cfg.n_phonemes, {2, 7}, torch::kLong);
  auto out = enc(ids, style);
  auto swapped = enc(ids.flip(0), style.flip(0));
  EXPECT_LT(max_abs_diff(out, swapped.flip(0)), 1e-5);
}

TEST(PhonemeEncoder, Errors) {
  auto cfg = small_encoder();
  PhonemeEncoder enc(cfg);
  auto style = torch::randn({1, cfg.d_style});
  EXPECT_THROW(enc(torch::tensor({{static_cast<long>(cfg.n_phonemes)}}), style), InvalidArgument);
  StyleEmbedding styles(4, 8);
  EXPECT_THROW(styles(torch::tensor({4L})), InvalidArgument);
  EXPECT_THROW(styles(torch::tensor({-1L})), InvalidArgument);
}

TEST(PhonemeEncoder, StyleMattersAfterOneStep) {
  torch::manual_seed(4);
  auto cfg = small_encoder();
  PhonemeEncoder enc(cfg);
  StyleEmbedding styles(cfg.n_styles, cfg.d_style);
  torch::optim::Adam opt(enc->parameters(), 1e-2);
  auto params = styles->parameters();
  opt.add_param_group(torch::optim::OptimizerParamGroup(params));
  auto ids = torch::tensor({{1L, 5L, 9L}});
  auto loss = enc(ids, styles(torch::tensor({0L}))).pow(2).mean() - enc(ids, styles(torch::tensor({1L}))).mean();
  loss.backward();
  opt.step();
  torch::NoGradGuard ng;
  EXPECT_GT(max_abs_diff(enc(ids, styles(torch::tensor({0L}))), enc(ids, styles(torch::tensor({1L})))), 1e-4);
}

TEST(Sain, UnitGainZeroBiasNormalizes) {
  auto x = torch::randn({2, 5, 40}) * 3 + 7;
  auto y = instance_normalize(x, torch::ones({2, 5}), torch::zeros({2, 5}));
  EXPECT_LT(y.mean(2).abs().max().item<double>(), 1e-5);
  EXPECT_LT((y.var(2, false) - 1).abs().max().item<double>(), 1e-3);
}

TEST(Sain, ZeroGainGivesBias) {
  auto x = torch::randn({1, 3, 10});
  auto beta = torch::tensor({{0.5f, -1.0f, 2.0f}});
  auto y = instance_normalize(x, torch::zeros({1, 3}), beta);
  EXPECT_LT(max_abs_diff(y, beta.unsqueeze(2).expand_as(y)), 1e-7);
}

TEST(Sain, ScaleInvariant) {
  torch::manual_seed(6);
  Sain sain(6, 4);
  auto x = 10.0 * torch::randn({1, 6, 30}).to(torch::kFloat64);
  sain->to(torch::kFloat64);
  auto style = torch::randn({1, 4}, torch::kFloat64);
  EXPECT_LT(max_abs_diff(sain(x, style), sain(x * 17.0, style)), 1e-6);
}

TEST(Sain, NeedsTwoFrames) {
  Sain sain(2, 2);
  EXPECT_THROW(sain(torch::randn({1, 2, 1}), torch::randn({1, 2})), InvalidArgument);
}

TEST(FrameEncoder, ShapeAndStyleSensitivity) {
  torch::manual_seed(7);
  auto cfg = small_encoder();
  FrameEncoder enc(cfg);
  enc->eval();
  std::vector<int> dur{3, 4, 2};
  std::vector<double> pitch{180, 0, 240}, range{20, 0, 10};
  auto frames = torch::randn({1, 9, cfg.d_model});
  auto style_a = torch::zeros({1, cfg.d_style}), style_b = torch::zeros({1, cfg.d_style});
  style_b[0][0] = 1.0;
  {
    torch::NoGradGuard ng;
    for (std::size_t i = 0; i < 2; ++i) {
      auto lin = enc->sain(i)->style_affine;
      lin->weight.zero_();
      lin->bias.zero_();
      lin->weight[3][0] = 2.0;  // style_b scales channel 3 by 3x
    }
  }
  auto ca = enc(frames, style_a, pitch, range, dur);
  auto cb = enc(frames, style_b, pitch, range, dur);
  EXPECT_EQ(ca.sizes(), (std::vector<long>{1, cfg.d_model, 9}));
  EXPECT_GT(max_abs_diff(ca, cb), 1e-3);
  // With identity SAIN each channel is instance-normalised over time.
  EXPECT_LT(ca.mean(2).abs().max().item<double>(), 1e-4);
  EXPECT_THROW(enc(frames, style_a, pitch, range, std::vector<int>{3, 4, 3}), InvalidArgument);
}

TEST(PitchBins, Layout) {
  EncoderConfig e;
  EXPECT_EQ(pitch_bin(0.0, e), 0);
  EXPECT_EQ(pitch_bin(e.pitch_min_hz, e), 1);
  EXPECT_EQ(pitch_bin(e.pitch_max_hz * 2, e), e.pitch_bins);
  EXPECT_LT(pitch_bin(150, e), pitch_bin(300, e));
  EXPECT_EQ(range_bin(0.0, e), 0);
  EXPECT_EQ(range_bin(1e6, e), e.range_bins - 1);
}

TEST(PriorProjection, ZeroWeightsAndShapes) {
  PriorProjection proj(16, 8);
  auto c = torch::randn({1, 16, 11});
  auto stats = proj(c);
  EXPECT_EQ(stats.mean.sizes(), (std::vector<long>{1, 8, 11}));
  EXPECT_EQ(stats.log_std.sizes(), (std::vector<long>{1, 8, 11}));
  EXPECT_TRUE((stats.std() > 0).all().item<bool>());
  {
    torch::NoGradGuard ng;
    proj->proj->weight.zero_();
    proj->proj->bias.zero_();
  }
  stats = proj(c);
  EXPECT_EQ(stats.mean.abs().max().item<float>(), 0.0f);
  EXPECT_TRUE(torch::equal(stats.std(), torch::ones_like(stats.std())));
}

}  // namespace
}  // namespace etts
