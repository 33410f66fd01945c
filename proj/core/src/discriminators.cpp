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

#include "etts/discriminators.hpp"

#include <algorithm>

#include "etts/error.hpp"

namespace etts {
namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace {
constexpr double kSlope = 0.1;
}

torch::Tensor reshape_for_period(const torch::Tensor& waveform, int period) {
  ETTS_CHECK(period >= 1, "reshape_for_period: period must be >= 1");
  ETTS_CHECK(waveform.dim() == 2 && waveform.size(1) > 0, "reshape_for_period: expected non-empty [B, T]");
  const long t = waveform.size(1);
  const long pad = (period - t % period) % period;
  auto x = waveform.unsqueeze(1);
  if (pad > 0) {
    auto options = F::PadFuncOptions({0, pad});
    if (pad < t)
      options.mode(torch::kReflect);
    else
      options.mode(torch::kReplicate);
    x = F::pad(x, options);
  }
  return x.view({waveform.size(0), 1, (t + pad) / period, period});
}

PeriodDiscriminatorImpl::PeriodDiscriminatorImpl(int period, const std::vector<int>& channels) : period_(period) {
  int in = 1;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const long stride = i + 1 < channels.size() ? 3 : 1;
    convs_.push_back(register_module(
        "conv" + std::to_string(i),
        nn::Conv2d(nn::Conv2dOptions(in, channels[i], {5, 1}).stride({stride, 1}).padding({2, 0}))));
    in = channels[i];
  }
  post_ = register_module("post", nn::Conv2d(nn::Conv2dOptions(in, 1, {3, 1}).padding({1, 0})));
}

DiscriminatorOutput PeriodDiscriminatorImpl::forward(const torch::Tensor& waveform) {
  DiscriminatorOutput out;
  auto x = reshape_for_period(waveform, period_);
  for (auto& conv : convs_) {
    x = F::leaky_relu(conv(x), F::LeakyReLUFuncOptions().negative_slope(kSlope));
    out.features.push_back(x);
  }
  x = post_(x);
  out.features.push_back(x);
  out.score = x.flatten(1);
  return out;
}

ResolutionDiscriminatorImpl::ResolutionDiscriminatorImpl(const StftResolution& resolution, int channels)
    : resolution_(resolution) {
  auto conv = [&](int in, std::vector<long> kernel, std::vector<long> stride, std::vector<long> padding) {
    return nn::Conv2d(nn::Conv2dOptions(in, channels, kernel).stride(stride).padding(padding));
  };
  convs_.push_back(register_module("conv0", conv(1, {3, 9}, {1, 1}, {1, 4})));
  for (int i = 1; i <= 3; ++i)
    convs_.push_back(register_module("conv" + std::to_string(i), conv(channels, {3, 9}, {1, 2}, {1, 4})));
  convs_.push_back(register_module("conv4", conv(channels, {3, 3}, {1, 1}, {1, 1})));
  post_ = register_module("post", nn::Conv2d(nn::Conv2dOptions(channels, 1, {3, 3}).padding({1, 1})));
}

torch::Tensor ResolutionDiscriminatorImpl::spectrogram(const torch::Tensor& waveform) const {
  const auto& r = resolution_;
  const long pad = (r.fft_size - r.hop_size) / 2;
  auto x = F::pad(waveform.unsqueeze(1), F::PadFuncOptions({pad, pad}).mode(torch::kReflect)).squeeze(1);
  auto window = torch::hann_window(r.win_size, waveform.options().requires_grad(false));
  auto spec = torch::stft(x, r.fft_size, r.hop_size, r.win_size, window, false, true, true);
  return torch::abs(spec);
}

DiscriminatorOutput ResolutionDiscriminatorImpl::forward_spectrogram(const torch::Tensor& spec) {
  DiscriminatorOutput out;
  auto x = spec.unsqueeze(1);
  for (auto& conv : convs_) {
    x = F::leaky_relu(conv(x), F::LeakyReLUFuncOptions().negative_slope(kSlope));
    out.features.push_back(x);
  }
  x = post_(x);
  out.features.push_back(x);
  out.score = x.flatten(1);
  return out;
}

DiscriminatorOutput ResolutionDiscriminatorImpl::forward(const torch::Tensor& waveform) {
  return forward_spectrogram(spectrogram(waveform));
}

MultiPeriodDiscriminatorImpl::MultiPeriodDiscriminatorImpl(const DiscriminatorConfig& config) {
  for (int p : config.periods) {
    subs_.push_back(register_module("period" + std::to_string(p), PeriodDiscriminator(p, config.mpd_channels)));
    max_period_ = std::max(max_period_, p);
  }
}

DiscriminatorOutputs MultiPeriodDiscriminatorImpl::forward(const torch::Tensor& waveform) {
  ETTS_CHECK(waveform.dim() == 2, "mpd: expected [B, T]");
  ETTS_CHECK(waveform.size(1) >= max_period_, "mpd: waveform shorter than the largest period");
  DiscriminatorOutputs outs;
  for (auto& sub : subs_) outs.push_back(sub(waveform));
  return outs;
}

MultiResolutionDiscriminatorImpl::MultiResolutionDiscriminatorImpl(const DiscriminatorConfig& config) {
  for (std::size_t i = 0; i < config.resolutions.size(); ++i) {
    const auto& r = config.resolutions[i];
    subs_.push_back(register_module("resolution" + std::to_string(i), ResolutionDiscriminator(r, config.mrd_channels)));
    max_window_ = std::max({max_window_, r.win_size, (r.fft_size - r.hop_size) / 2 + 1});
  }
}

DiscriminatorOutputs MultiResolutionDiscriminatorImpl::forward(const torch::Tensor& waveform) {
  ETTS_CHECK(waveform.dim() == 2, "mrd: expected [B, T]");
  ETTS_CHECK(waveform.size(1) >= max_window_, "mrd: waveform shorter than the largest analysis window");
  DiscriminatorOutputs outs;
  for (auto& sub : subs_) outs.push_back(sub(waveform));
  return outs;
}

DiscriminatorSetImpl::DiscriminatorSetImpl(const DiscriminatorConfig& config) {
  mpd = register_module("mpd", MultiPeriodDiscriminator(config));
  mrd = register_module("mrd", MultiResolutionDiscriminator(config));
}

DiscriminatorOutputs DiscriminatorSetImpl::forward(const torch::Tensor& waveform) {
  auto outs = mpd(waveform);
  auto more = mrd(waveform);
  outs.insert(outs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  return outs;
}

std::vector<std::vector<torch::Tensor>> DiscriminatorSetImpl::submodule_parameters() const {
  std::vector<std::vector<torch::Tensor>> groups;
  for (std::size_t i = 0; i < mpd->size(); ++i) groups.push_back(mpd->sub(i)->parameters());
  for (std::size_t i = 0; i < mrd->size(); ++i) groups.push_back(mrd->sub(i)->parameters());
  return groups;
}

}  // namespace etts
