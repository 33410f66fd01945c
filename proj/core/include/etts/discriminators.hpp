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

#pragma once

#include <torch/torch.h>

#include <vector>

#include "etts/config.hpp"

namespace etts {

/// Score map plus every intermediate activation of one sub-discriminator.
struct DiscriminatorOutput {
  torch::Tensor score;
  std::vector<torch::Tensor> features;
};

using DiscriminatorOutputs = std::vector<DiscriminatorOutput>;

/// [B, T] -> [B, 1, ceil(T / p), p], right-padding by reflection (or edge
/// replication when the signal is too short to reflect).
torch::Tensor reshape_for_period(const torch::Tensor& waveform, int period);

class PeriodDiscriminatorImpl : public torch::nn::Module {
 public:
  PeriodDiscriminatorImpl(int period, const std::vector<int>& channels);
  DiscriminatorOutput forward(const torch::Tensor& waveform);
  int period() const { return period_; }

 private:
  int period_;
  std::vector<torch::nn::Conv2d> convs_;
  torch::nn::Conv2d post_{nullptr};
};
TORCH_MODULE(PeriodDiscriminator);

class ResolutionDiscriminatorImpl : public torch::nn::Module {
 public:
  ResolutionDiscriminatorImpl(const StftResolution& resolution, int channels);
  DiscriminatorOutput forward(const torch::Tensor& waveform);
  /// Magnitude spectrogram [B, fft / 2 + 1, frames] fed to the conv stack.
  torch::Tensor spectrogram(const torch::Tensor& waveform) const;
  /// Conv stack applied to a [B, bins, frames] spectrogram.
  DiscriminatorOutput forward_spectrogram(const torch::Tensor& spec);
  const StftResolution& resolution() const { return resolution_; }

 private:
  StftResolution resolution_;
  std::vector<torch::nn::Conv2d> convs_;
  torch::nn::Conv2d post_{nullptr};
};
TORCH_MODULE(ResolutionDiscriminator);

class MultiPeriodDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit MultiPeriodDiscriminatorImpl(const DiscriminatorConfig& config);
  DiscriminatorOutputs forward(const torch::Tensor& waveform);
  std::size_t size() const { return subs_.size(); }
  PeriodDiscriminator sub(std::size_t i) const { return subs_[i]; }

 private:
  int max_period_ = 1;
  std::vector<PeriodDiscriminator> subs_;
};
TORCH_MODULE(MultiPeriodDiscriminator);

class MultiResolutionDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit MultiResolutionDiscriminatorImpl(const DiscriminatorConfig& config);
  DiscriminatorOutputs forward(const torch::Tensor& waveform);
  std::size_t size() const { return subs_.size(); }
  ResolutionDiscriminator sub(std::size_t i) const { return subs_[i]; }

 private:
  int max_window_ = 1;
  std::vector<ResolutionDiscriminator> subs_;
};
TORCH_MODULE(MultiResolutionDiscriminator);

/// All sub-discriminators, MPD first then MRD.
class DiscriminatorSetImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorSetImpl(const DiscriminatorConfig& config);
  /// waveform: [B, T].
  DiscriminatorOutputs forward(const torch::Tensor& waveform);
  /// Parameters of each sub-discriminator, in output order.
  std::vector<std::vector<torch::Tensor>> submodule_parameters() const;

  MultiPeriodDiscriminator mpd{nullptr};
  MultiResolutionDiscriminator mrd{nullptr};
};
TORCH_MODULE(DiscriminatorSet);

}  // namespace etts
