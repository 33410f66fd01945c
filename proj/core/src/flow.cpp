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

#include "etts/flow.hpp"

#include "etts/error.hpp"

namespace etts {
namespace nn = torch::nn;

CouplingLayerImpl::CouplingLayerImpl(int channels, int hidden, const FlowConfig& config, int style_channels,
                                     int frame_channels)
    : half_(channels / 2), rest_(channels - channels / 2), mean_only_(config.mean_only) {
  ETTS_CHECK(half_ >= 1, "coupling layer needs at least 2 channels");
  pre_ = register_module("pre", nn::Conv1d(nn::Conv1dOptions(half_, hidden, 1)));
  WaveNetOptions wn;
  wn.hidden = hidden;
  wn.kernel = config.kernel;
  wn.dilation_rate = config.dilation_rate;
  wn.layers = config.wavenet_layers;
  wn.global_channels = style_channels;
  wn.frame_channels = frame_channels;
  conditioner_ = register_module("conditioner", WaveNet(wn));
  post = register_module("post", nn::Conv1d(nn::Conv1dOptions(hidden, rest_ * (mean_only_ ? 1 : 2), 1)));
  torch::NoGradGuard no_grad;
  post->weight.zero_();
  post->bias.zero_();
}

std::pair<torch::Tensor, torch::Tensor> CouplingLayerImpl::shift_and_log_scale(const torch::Tensor& x0,
                                                                               const torch::Tensor& style,
                                                                               const torch::Tensor& c) {
  auto stats = post(conditioner_(pre_(x0), style, c));
  if (mean_only_) return {stats, torch::zeros_like(stats)};
  auto m = stats.narrow(1, 0, rest_);
  auto log_scale = 5.0 * torch::tanh(stats.narrow(1, rest_, rest_) / 5.0);
  return {m, log_scale};
}

FlowOutput CouplingLayerImpl::forward(const torch::Tensor& x, const torch::Tensor& style, const torch::Tensor& c) {
  auto x0 = x.narrow(1, 0, half_);
  auto x1 = x.narrow(1, half_, rest_);
  auto [m, log_scale] = shift_and_log_scale(x0, style, c);
  if (mean_only_) return {torch::cat({x0, m + x1}, 1), torch::zeros({x.size(0), x.size(2)}, x.options())};
  return {torch::cat({x0, m + x1 * torch::exp(log_scale)}, 1), log_scale.sum(1)};
}

torch::Tensor CouplingLayerImpl::inverse(const torch::Tensor& y, const torch::Tensor& style, const torch::Tensor& c) {
  auto y0 = y.narrow(1, 0, half_);
  auto y1 = y.narrow(1, half_, rest_);
  auto [m, log_scale] = shift_and_log_scale(y0, style, c);
  if (mean_only_) return torch::cat({y0, y1 - m}, 1);
  return torch::cat({y0, (y1 - m) * torch::exp(-log_scale)}, 1);
}

FlowStackImpl::FlowStackImpl(int channels, int hidden, const FlowConfig& config, int style_channels,
                             int frame_channels)
    : channels_(channels), use_frames_(config.condition_on_frames) {
  for (int i = 0; i < config.n_couplings; ++i)
    layers_.push_back(register_module(
        "coupling" + std::to_string(i),
        CouplingLayer(channels, hidden, config, style_channels, use_frames_ ? frame_channels : 0)));
}

void FlowStackImpl::check(const torch::Tensor& x, const torch::Tensor& c) const {
  ETTS_CHECK(x.dim() == 3 && x.size(1) == channels_, "flow: expected [B, " + std::to_string(channels_) + ", T]");
  if (use_frames_) {
    ETTS_CHECK(c.defined() && c.dim() == 3, "flow: frame condition required");
    ETTS_CHECK(c.size(2) == x.size(2), "flow: latent has " + std::to_string(x.size(2)) + " frames, condition has " +
                                           std::to_string(c.size(2)));
  }
}

FlowOutput FlowStackImpl::forward(const torch::Tensor& z, const torch::Tensor& c, const torch::Tensor& style) {
  check(z, c);
  const auto cond = use_frames_ ? c : torch::Tensor();
  auto x = z;
  auto logdet = torch::zeros({z.size(0), z.size(2)}, z.options());
  for (auto& layer : layers_) {
    auto out = layer(x, style, cond);
    logdet = logdet + out.logdet;
    x = torch::flip(out.e, {1});
  }
  return {x, logdet};
}

torch::Tensor FlowStackImpl::inverse(const torch::Tensor& e, const torch::Tensor& c, const torch::Tensor& style) {
  check(e, c);
  const auto cond = use_frames_ ? c : torch::Tensor();
  auto x = e;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) x = (*it)->inverse(torch::flip(x, {1}), style, cond);
  return x;
}

void FlowStackImpl::zero_output_layers() {
  torch::NoGradGuard no_grad;
  for (auto& layer : layers_) {
    layer->post->weight.zero_();
    layer->post->bias.zero_();
  }
}

torch::Tensor prior_log_density(FlowStack& flow, const torch::Tensor& z, const torch::Tensor& c,
                                const torch::Tensor& style, const PriorStats& stats) {
  ETTS_CHECK(stats.log_std.defined() && torch::isfinite(stats.log_std).all().item<bool>(),
             "prior_log_density: prior standard deviations must be > 0 and finite");
  auto out = flow(z, c, style);
  return diag_normal_log_density(out.e, stats) + out.logdet;
}

}  // namespace etts
