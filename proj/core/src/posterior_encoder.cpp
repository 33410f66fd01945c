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

#include "etts/posterior_encoder.hpp"

#include "etts/error.hpp"

namespace etts {
namespace nn = torch::nn;

PosteriorEncoderImpl::PosteriorEncoderImpl(int linear_bins, int d_latent, int d_style, const PosteriorConfig& config)
    : d_latent_(d_latent) {
  pre_ = register_module("pre", nn::Conv1d(nn::Conv1dOptions(linear_bins, config.hidden, 1)));
  WaveNetOptions wn;
  wn.hidden = config.hidden;
  wn.kernel = config.kernel;
  wn.dilation_rate = config.dilation_rate;
  wn.layers = config.layers;
  wn.global_channels = d_style;
  wavenet_ = register_module("wavenet", WaveNet(wn));
  sain = register_module("sain", Sain(config.hidden, d_style));
  proj = register_module("proj", nn::Conv1d(nn::Conv1dOptions(config.hidden, 2 * d_latent, 1)));
}

PosteriorStats PosteriorEncoderImpl::forward(const torch::Tensor& x, const torch::Tensor& style) {
  ETTS_CHECK(x.dim() == 3, "encode_posterior: expected [B, bins, T]");
  ETTS_CHECK(x.size(2) >= 2, "encode_posterior: need at least 2 frames");
  auto h = wavenet_(pre_(x), style);
  h = sain(h, style);
  auto stats = proj(h).split(d_latent_, 1);
  PosteriorStats out;
  out.mean = stats[0];
  out.log_std = stats[1];
  return out;
}

torch::Tensor sample_latent(const PosteriorStats& stats, double noise_scale, torch::Generator& generator) {
  return sample_diag_normal(stats, noise_scale, generator);
}

torch::Tensor posterior_log_density(const torch::Tensor& z, const PosteriorStats& stats) {
  ETTS_CHECK(stats.log_std.defined() && torch::isfinite(stats.log_std).all().item<bool>(),
             "posterior_log_density: standard deviations must be > 0 and finite");
  return diag_normal_log_density(z, stats);
}

}  // namespace etts
