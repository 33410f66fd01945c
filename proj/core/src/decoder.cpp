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

#include "etts/decoder.hpp"

#include <cmath>
#include <numbers>

#include "etts/error.hpp"

namespace etts {
namespace nn = torch::nn;
namespace F = torch::nn::functional;

double snake(double x, double alpha) {
  ETTS_CHECK(alpha > 0.0, "snake: alpha must be > 0");
  const double s = std::sin(alpha * x);
  return x + s * s / alpha;
}

torch::Tensor kaiser_sinc_filter(double cutoff, double half_width, int taps, double beta) {
  ETTS_CHECK(taps >= 2 && taps % 2 == 0, "kaiser_sinc_filter: taps must be even");
  const int half = taps / 2;
  if (beta <= 0.0) {
    const double delta_f = 4.0 * half_width;
    const double attenuation = 2.285 * (half - 1) * std::numbers::pi * delta_f + 7.95;
    if (attenuation > 50.0)
      beta = 0.1102 * (attenuation - 8.7);
    else if (attenuation >= 21.0)
      beta = 0.5842 * std::pow(attenuation - 21.0, 0.4) + 0.07886 * (attenuation - 21.0);
    else
      beta = 0.0;
  }
  auto window = torch::kaiser_window(taps, /*periodic=*/false, beta, torch::kFloat64);
  auto t = torch::arange(-half, half, torch::kFloat64) + 0.5;
  auto filter = 2.0 * cutoff * window * torch::sinc(2.0 * cutoff * t);
  return (filter / filter.sum()).to(torch::kFloat32);
}

Upsample2Impl::Upsample2Impl(int taps, double beta) : taps_(taps) {
  filter_ = register_buffer("filter", kaiser_sinc_filter(0.25, 0.3, taps, beta).view({1, 1, taps}));
}

torch::Tensor Upsample2Impl::forward(const torch::Tensor& x) {
  ETTS_CHECK(x.dim() == 3, "upsample2: expected [B, C, T]");
  ETTS_CHECK(x.size(2) >= taps_ / 2, "upsample2: signal shorter than the filter footprint");
  constexpr int ratio = 2;
  const long pad = taps_ / ratio - 1;
  const long pad_left = pad * ratio + (taps_ - ratio) / 2;
  const long pad_right = pad * ratio + (taps_ - ratio + 1) / 2;
  const long channels = x.size(1);
  auto padded = F::pad(x, F::PadFuncOptions({pad, pad}).mode(torch::kReplicate));
  auto y = ratio * F::conv_transpose1d(padded, filter_.expand({channels, 1, taps_}),
                                       F::ConvTranspose1dFuncOptions().stride(ratio).groups(channels));
  return y.narrow(2, pad_left, y.size(2) - pad_left - pad_right);
}

Downsample2Impl::Downsample2Impl(int taps, double beta) : taps_(taps) {
  filter_ = register_buffer("filter", kaiser_sinc_filter(0.25, 0.3, taps, beta).view({1, 1, taps}));
}

torch::Tensor Downsample2Impl::forward(const torch::Tensor& x) {
  ETTS_CHECK(x.dim() == 3, "downsample2: expected [B, C, T]");
  ETTS_CHECK(x.size(2) >= taps_, "downsample2: signal shorter than the filter");
  const long channels = x.size(1);
  auto padded = F::pad(x, F::PadFuncOptions({taps_ / 2 - 1, taps_ / 2}).mode(torch::kReplicate));
  return F::conv1d(padded, filter_.expand({channels, 1, taps_}), F::Conv1dFuncOptions().stride(2).groups(channels));
}

SnakeImpl::SnakeImpl(int channels, double alpha_init) {
  ETTS_CHECK(alpha_init > 0.0, "snake: alpha_init must be > 0");
  log_alpha_ = register_parameter("log_alpha", torch::full({1, channels, 1}, std::log(alpha_init)));
}

torch::Tensor SnakeImpl::forward(const torch::Tensor& x) {
  auto a = torch::exp(log_alpha_);
  return x + torch::sin(x * a).pow(2) / (a + 1e-9);
}

AliasFreeSnakeImpl::AliasFreeSnakeImpl(int channels, const GeneratorConfig& config) {
  up_ = register_module("up", Upsample2(config.lowpass_taps, config.lowpass_beta));
  snake_ = register_module("snake", Snake(channels, config.snake_alpha_init));
  down_ = register_module("down", Downsample2(config.lowpass_taps, config.lowpass_beta));
}

torch::Tensor AliasFreeSnakeImpl::forward(const torch::Tensor& x) {
  if (!anti_alias_) return snake_(x);
  return down_(snake_(up_(x)));
}

AmpResBlockImpl::AmpResBlockImpl(int channels, int kernel, const std::vector<int>& dilations,
                                 const GeneratorConfig& config) {
  for (std::size_t i = 0; i < dilations.size(); ++i) {
    const int d = dilations[i];
    dilated_.push_back(register_module(
        "dilated" + std::to_string(i),
        nn::Conv1d(nn::Conv1dOptions(channels, channels, kernel).dilation(d).padding((kernel * d - d) / 2))));
    output_.push_back(register_module(
        "output" + std::to_string(i),
        nn::Conv1d(nn::Conv1dOptions(channels, channels, kernel).padding((kernel - 1) / 2))));
    acts_.push_back(register_module("act" + std::to_string(2 * i), AliasFreeSnake(channels, config)));
    acts_.push_back(register_module("act" + std::to_string(2 * i + 1), AliasFreeSnake(channels, config)));
  }
}

torch::Tensor AmpResBlockImpl::forward(const torch::Tensor& x) {
  auto h = x;
  for (std::size_t i = 0; i < dilated_.size(); ++i) {
    auto t = dilated_[i](acts_[2 * i](h));
    t = output_[i](acts_[2 * i + 1](t));
    h = h + t;
  }
  return h;
}

void AmpResBlockImpl::zero_output_convs() {
  torch::NoGradGuard no_grad;
  for (auto& conv : output_) {
    conv->weight.zero_();
    conv->bias.zero_();
  }
}

void AmpResBlockImpl::set_anti_aliasing(bool enabled) {
  for (auto& act : acts_) act->set_anti_aliasing(enabled);
}

AmpBlockImpl::AmpBlockImpl(int channels, const GeneratorConfig& config) {
  for (std::size_t i = 0; i < config.amp_kernel_sizes.size(); ++i)
    branches_.push_back(register_module(
        "branch" + std::to_string(i),
        AmpResBlock(channels, config.amp_kernel_sizes[i], config.amp_dilations[i], config)));
}

torch::Tensor AmpBlockImpl::forward(const torch::Tensor& x) {
  torch::Tensor sum;
  for (auto& branch : branches_) {
    auto y = branch(x);
    sum = sum.defined() ? sum + y : y;
  }
  return sum / static_cast<double>(branches_.size());
}

void AmpBlockImpl::zero_output_convs() {
  for (auto& b : branches_) b->zero_output_convs();
}

void AmpBlockImpl::set_anti_aliasing(bool enabled) {
  for (auto& b : branches_) b->set_anti_aliasing(enabled);
}

GeneratorImpl::GeneratorImpl(int d_latent, int d_style, const GeneratorConfig& config)
    : hop_(config.total_upsampling()) {
  style_proj_ = register_module("style_proj", nn::Linear(d_style, d_latent));
  int channels = config.initial_channels;
  conv_pre_ = register_module("conv_pre", nn::Conv1d(nn::Conv1dOptions(d_latent, channels, 7).padding(3)));
  for (std::size_t i = 0; i < config.upsample_rates.size(); ++i) {
    const int r = config.upsample_rates[i];
    ups_.push_back(register_module(
        "up" + std::to_string(i),
        nn::ConvTranspose1d(nn::ConvTranspose1dOptions(channels, channels / 2, 2 * r).stride(r).padding(r / 2))));
    channels /= 2;
    amps_.push_back(register_module("amp" + std::to_string(i), AmpBlock(channels, config)));
  }
  act_post_ = register_module("act_post", AliasFreeSnake(channels, config));
  conv_post_ = register_module("conv_post", nn::Conv1d(nn::Conv1dOptions(channels, 1, 7).padding(3)));
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& z, const torch::Tensor& style) {
  ETTS_CHECK(z.dim() == 3 && z.size(2) > 0, "decode_waveform: expected non-empty [B, d_latent, T]");
  auto x = conv_pre_(z + style_proj_(style).unsqueeze(2));
  for (std::size_t i = 0; i < ups_.size(); ++i) x = amps_[i](ups_[i](x));
  x = conv_post_(act_post_(x));
  return torch::tanh(x).squeeze(1);
}

void GeneratorImpl::set_anti_aliasing(bool enabled) {
  for (auto& amp : amps_) amp->set_anti_aliasing(enabled);
  act_post_->set_anti_aliasing(enabled);
}

}  // namespace etts
