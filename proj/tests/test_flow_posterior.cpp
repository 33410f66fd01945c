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
#include <numbers>

#include "etts/error.hpp"
#include "etts/flow.hpp"
#include "etts/gaussian.hpp"
#include "etts/losses.hpp"
#include "etts/posterior_encoder.hpp"
#include "test_util.hpp"

namespace etts {
namespace {

using testing::max_abs_diff;

const double kHalfLog2Pi = 0.5 * std::log(2 * std::numbers::pi);

FlowStack random_flow(int channels, int frame_channels, bool mean_only, int couplings = 2) {
  FlowConfig cfg;
  cfg.n_couplings = couplings;
  cfg.wavenet_layers = 2;
  cfg.kernel = 3;
  cfg.mean_only = mean_only;
  FlowStack flow(channels, 8, cfg, 3, frame_channels);
  flow->to(torch::kFloat64);
  torch::NoGradGuard ng;
  for (std::size_t i = 0; i < flow->size(); ++i) {
    flow->layer(i)->post->weight.normal_(0, 0.3);
    flow->layer(i)->post->bias.normal_(0, 0.3);
  }
  return flow;
}

TEST(Flow, ZeroInitIsIdentityWithZeroLogdet) {
  FlowConfig cfg;
  FlowStack flow(6, 8, cfg, 3, 5);
  auto z = torch::randn({2, 6, 9}), c = torch::randn({2, 5, 9}), s = torch::randn({2, 3});
  auto out = flow(z, c, s);
  EXPECT_TRUE(torch::equal(out.e, z));
  EXPECT_EQ(out.logdet.abs().max().item<float>(), 0.0f);
  EXPECT_TRUE(torch::equal(flow->inverse(z, c, s), z));
}

TEST(Flow, MeanOnlyLogdetIsExactlyZero) {
  torch::manual_seed(1);
  auto flow = random_flow(6, 5, true);
  auto z = torch::randn({1, 6, 7}, torch::kFloat64) * 10;
  auto out = flow(z, torch::randn({1, 5, 7}, torch::kFloat64), torch::randn({1, 3}, torch::kFloat64));
  EXPECT_EQ(out.logdet.abs().max().item<double>(), 0.0);
  EXPECT_GT(max_abs_diff(out.e, z), 1e-3);
}

TEST(Flow, InverseRoundTrip) {
  torch::manual_seed(2);
  for (bool mean_only : {true, false}) {
    auto flow = random_flow(8, 5, mean_only, 4);
    auto z = torch::randn({2, 8, 13}, torch::kFloat64);
    auto c = torch::randn({2, 5, 13}, torch::kFloat64);
    auto s = torch::randn({2, 3}, torch::kFloat64);
    EXPECT_LT(max_abs_diff(flow->inverse(flow(z, c, s).e, c, s), z), 1e-10);
  }
}

TEST(Flow, SingleLayerMatchesHandSolvedInverse) {
  torch::manual_seed(3);
  auto flow = random_flow(4, 5, false, 1);
  auto layer = flow->layer(0);
  auto c = torch::randn({1, 5, 6}, torch::kFloat64);
  auto s = torch::randn({1, 3}, torch::kFloat64);
  auto e = torch::randn({1, 4, 6}, torch::kFloat64);
  // Forward output is flipped; undo the flip, then invert y1 = m + x1 * exp(log_s).
  auto y = e.flip(1);
  auto y0 = y.narrow(1, 0, 2), y1 = y.narrow(1, 2, 2);
  auto [m, log_s] = layer->shift_and_log_scale(y0, s, c);
  auto expected = torch::cat({y0, (y1 - m) / torch::exp(log_s)}, 1);
  EXPECT_LT(max_abs_diff(flow->inverse(e, c, s), expected), 1e-12);
}

TEST(Flow, LogdetMatchesNumericalJacobian) {
  torch::manual_seed(4);
  auto flow = random_flow(4, 5, false);
  const long t = 3;
  auto c = torch::randn({1, 5, t}, torch::kFloat64);
  auto s = torch::randn({1, 3}, torch::kFloat64);
  auto z = torch::randn({1, 4, t}, torch::kFloat64);
  torch::NoGradGuard ng;
  const long n = 4 * t;
  auto jac = torch::zeros({n, n}, torch::kFloat64);
  const double h = 1e-6;
  for (long k = 0; k < n; ++k) {
    auto dz = torch::zeros({n}, torch::kFloat64);
    dz[k] = h;
    auto plus = flow(z + dz.view({1, 4, t}), c, s).e.reshape({-1});
    auto minus = flow(z - dz.view({1, 4, t}), c, s).e.reshape({-1});
    jac.select(1, k).copy_((plus - minus) / (2 * h));
  }
  auto [sign, logabs] = torch::linalg_slogdet(jac);
  EXPECT_NEAR(flow(z, c, s).logdet.sum().item<double>(), logabs.item<double>(), 1e-3);
}

TEST(Flow, FrameMismatchThrows) {
  FlowConfig cfg;
  FlowStack flow(4, 8, cfg, 3, 5);
  EXPECT_THROW(flow(torch::randn({1, 4, 6}), torch::randn({1, 5, 7}), torch::randn({1, 3})), InvalidArgument);
}

TEST(PriorDensity, StandardNormalAtMode) {
  FlowConfig cfg;
  FlowStack flow(6, 8, cfg, 3, 5);
  auto c = torch::randn({1, 5, 4}), s = torch::randn({1, 3});
  PriorStats stats;
  stats.mean = torch::randn({1, 6, 4}) * 3;
  stats.log_std = torch::zeros({1, 6, 4});
  auto lp = prior_log_density(flow, stats.mean, c, s, stats);
  EXPECT_LT((lp + 6 * kHalfLog2Pi).abs().max().item<double>(), 1e-5);
  stats.log_std = torch::full({1, 6, 4}, std::numeric_limits<float>::infinity());
  EXPECT_THROW(prior_log_density(flow, stats.mean, c, s, stats), InvalidArgument);
}

TEST(PriorDensity, ChangeOfVariablesOracle) {
  torch::manual_seed(5);
  auto flow = random_flow(2, 5, false);
  auto c = torch::randn({1, 5, 1}, torch::kFloat64);
  auto s = torch::randn({1, 3}, torch::kFloat64);
  PriorStats stats;
  stats.mean = torch::tensor({0.3, -0.2}, torch::kFloat64).view({1, 2, 1});
  stats.log_std = torch::tensor({0.1, -0.3}, torch::kFloat64).view({1, 2, 1});
  auto z = torch::tensor({0.4, 0.7}, torch::kFloat64).view({1, 2, 1});
  torch::NoGradGuard ng;
  auto e = flow(z, c, s).e.reshape({-1});
  double log_base = 0;
  for (int i = 0; i < 2; ++i) {
    const double sd = std::exp(stats.log_std.reshape({-1})[i].item<double>());
    const double u = (e[i].item<double>() - stats.mean.reshape({-1})[i].item<double>()) / sd;
    log_base += -0.5 * u * u - std::log(sd) - kHalfLog2Pi;
  }
  const double h = 1e-6;
  auto jac = torch::zeros({2, 2}, torch::kFloat64);
  for (int k = 0; k < 2; ++k) {
    auto dz = torch::zeros({1, 2, 1}, torch::kFloat64);
    dz[0][k][0] = h;
    jac.select(1, k).copy_((flow(z + dz, c, s).e - flow(z - dz, c, s).e).reshape({-1}) / (2 * h));
  }
  const double expected = log_base + std::log(std::abs(torch::det(jac).item<double>()));
  EXPECT_NEAR(prior_log_density(flow, z, c, s, stats).item<double>(), expected, 1e-3);
}

TEST(Posterior, ShapesAndZeroProjection) {
  torch::manual_seed(6);
  PosteriorConfig cfg;
  cfg.hidden = 8;
  cfg.layers = 2;
  PosteriorEncoder enc(20, 6, 4, cfg);
  auto x = torch::rand({2, 20, 11}), s = torch::randn({2, 4});
  auto stats = enc(x, s);
  EXPECT_EQ(stats.mean.sizes(), (std::vector<long>{2, 6, 11}));
  EXPECT_EQ(stats.log_std.sizes(), (std::vector<long>{2, 6, 11}));
  {
    torch::NoGradGuard ng;
    enc->proj->weight.zero_();
    enc->proj->bias.zero_();
  }
  stats = enc(x, s);
  EXPECT_EQ(stats.mean.abs().max().item<float>(), 0.0f);
  EXPECT_TRUE(torch::equal(stats.std(), torch::ones_like(stats.std())));
  EXPECT_THROW(enc(torch::rand({1, 20, 1}), s.narrow(0, 0, 1)), InvalidArgument);
}

TEST(Posterior, StyleGainsChangeStats) {
  torch::manual_seed(7);
  PosteriorConfig cfg;
  cfg.hidden = 8;
  cfg.layers = 2;
  PosteriorEncoder enc(20, 6, 4, cfg);
  {
    torch::NoGradGuard ng;
    enc->sain->style_affine->weight.zero_();
    enc->sain->style_affine->bias.zero_();
    enc->sain->style_affine->weight[0][1] = 1.5;
  }
  auto x = torch::rand({1, 20, 9});
  auto a = torch::zeros({1, 4}), b = torch::zeros({1, 4});
  b[0][1] = 1.0;
  EXPECT_GT(max_abs_diff(enc(x, a).mean, enc(x, b).mean), 1e-4);
}

TEST(Sampling, NoiseZeroSeedAndMonteCarlo) {
  PosteriorStats stats;
  stats.mean = torch::randn({1, 3, 4});
  stats.log_std = torch::randn({1, 3, 4}) * 0.3;
  auto g1 = make_generator(9);
  EXPECT_TRUE(torch::equal(sample_latent(stats, 0.0, g1), stats.mean));
  auto g3 = make_generator(10), g4 = make_generator(10);
  EXPECT_TRUE(torch::equal(sample_latent(stats, 1.0, g3), sample_latent(stats, 1.0, g4)));
  EXPECT_THROW(sample_latent(stats, -1.0, g3), InvalidArgument);

  auto gen = make_generator(11);
  auto acc = torch::zeros_like(stats.mean, torch::kFloat64);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) acc += sample_latent(stats, 1.0, gen).to(torch::kFloat64);
  auto mean = acc / draws;
  auto bound = 3 * stats.std().to(torch::kFloat64) / std::sqrt(static_cast<double>(draws));
  // 12 elements at 3 sigma: a spurious failure has probability ~3%; allow one.
  EXPECT_LE(((mean - stats.mean.to(torch::kFloat64)).abs() > bound).sum().item<long>(), 1);
}

TEST(PosteriorDensity, ProductOfOneDimensionalNormals) {
  PosteriorStats stats;
  stats.mean = torch::tensor({0.5, -1.0, 2.0}, torch::kFloat64).view({1, 3, 1});
  stats.log_std = torch::tensor({0.0, 0.4, -0.7}, torch::kFloat64).view({1, 3, 1});
  auto z = torch::tensor({0.1, -0.2, 2.5}, torch::kFloat64).view({1, 3, 1});
  double density = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double m = stats.mean.reshape({-1})[i].item<double>();
    const double sd = std::exp(stats.log_std.reshape({-1})[i].item<double>());
    const double x = z.reshape({-1})[i].item<double>();
    density *= std::exp(-0.5 * (x - m) * (x - m) / (sd * sd)) / (sd * std::sqrt(2 * std::numbers::pi));
  }
  EXPECT_NEAR(posterior_log_density(z, stats).item<double>(), std::log(density), 1e-6);

  auto at_mode = posterior_log_density(stats.mean, PosteriorStats{{stats.mean, torch::zeros_like(stats.mean)}});
  EXPECT_NEAR(at_mode.item<double>(), -3 * kHalfLog2Pi, 1e-12);
}

TEST(PosteriorDensity, DecreasesAwayFromMean) {
  PosteriorStats stats;
  stats.mean = torch::zeros({1, 2, 1}, torch::kFloat64);
  stats.log_std = torch::zeros({1, 2, 1}, torch::kFloat64);
  double prev = 1e9;
  for (double d = 0; d < 5; d += 0.5) {
    auto z = torch::tensor({d, 0.0}, torch::kFloat64).view({1, 2, 1});
    const double lp = posterior_log_density(z, stats).item<double>();
    EXPECT_LT(lp, prev);
    prev = lp;
  }
}

TEST(Kl, ZeroForIdenticalDistributionsUnderIdentityFlow) {
  FlowConfig cfg;
  FlowStack flow(6, 8, cfg, 3, 5);
  PosteriorStats q;
  q.mean = torch::randn({1, 6, 5});
  q.log_std = torch::randn({1, 6, 5}) * 0.2;
  PriorStats p;
  p.mean = q.mean;
  p.log_std = q.log_std;
  auto c = torch::randn({1, 5, 5}), s = torch::randn({1, 3});
  auto gen = make_generator(1);
  for (int i = 0; i < 20; ++i) {
    auto z = sample_latent(q, 1.0, gen);
    EXPECT_EQ(kl_loss(z, q, flow, c, s, p).item<float>(), 0.0f);
  }
}

}  // namespace
}  // namespace etts
