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

/// x + sin^2(alpha x) / alpha. Throws for alpha <= 0.
double snake(double x, double alpha);

/// Kaiser-windowed sinc low-pass (even length, unit DC gain). cutoff and
/// half_width are in cycles per sample; beta <= 0 selects the value given by
/// the Kaiser design formula for the implied attenuation.
torch::Tensor kaiser_sinc_filter(double cutoff, double half_width, int taps, double beta = 0.0);

/// 2x zero-stuffing interpolator followed by the half-band low-pass.
/// [B, C, T] -> [B, C, 2T]. Requires T >= taps / 2.
class Upsample2Impl : public torch::nn::Module {
 public:
  explicit Upsample2Impl(int taps = 12, double beta = 0.0);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  int taps_;
  torch::Tensor filter_;
};
TORCH_MODULE(Upsample2);

/// Half-band low-pass then decimation by 2. [B, C, T] -> [B, C, T / 2].
/// Requires T >= taps.
class Downsample2Impl : public torch::nn::Module {
 public:
  explicit Downsample2Impl(int taps = 12, double beta = 0.0);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  int taps_;
  torch::Tensor filter_;
};
TORCH_MODULE(Downsample2);

/// Snake activation with a learnable per-channel alpha = exp(log_alpha).
class SnakeImpl : public torch::nn::Module {
 public:
  SnakeImpl(int channels, double alpha_init);
  torch::Tensor forward(const torch::Tensor& x);
  torch::Tensor alpha() const { return torch::exp(log_alpha_); }

 private:
  torch::Tensor log_alpha_;
};
TORCH_MODULE(Snake);

/// up2 -> snake -> down2. With anti-aliasing disabled it is snake alone.
class AliasFreeSnakeImpl : public torch::nn::Module {
 public:
  AliasFreeSnakeImpl(int channels, const GeneratorConfig& config);
  torch::Tensor forward(const torch::Tensor& x);
  void set_anti_aliasing(bool enabled) { anti_alias_ = enabled; }

 private:
  bool anti_alias_ = true;
  Upsample2 up_{nullptr};
  Snake snake_{nullptr};
  Downsample2 down_{nullptr};
};
TORCH_MODULE(AliasFreeSnake);

/// Residual branch: for each dilation d, x += conv(act(conv_d(act(x)))).
class AmpResBlockImpl : public torch::nn::Module {
 public:
  AmpResBlockImpl(int channels, int kernel, const std::vector<int>& dilations, const GeneratorConfig& config);
  torch::Tensor forward(const torch::Tensor& x);
  void zero_output_convs();
  void set_anti_aliasing(bool enabled);

 private:
  std::vector<torch::nn::Conv1d> dilated_, output_;
  std::vector<AliasFreeSnake> acts_;
};
TORCH_MODULE(AmpResBlock);

/// Anti-aliased multi-periodicity composition: the mean of parallel
/// residual branches with different kernel sizes.
class AmpBlockImpl : public torch::nn::Module {
 public:
  AmpBlockImpl(int channels, const GeneratorConfig& config);
  torch::Tensor forward(const torch::Tensor& x);
  void zero_output_convs();
  void set_anti_aliasing(bool enabled);

 private:
  std::vector<AmpResBlock> branches_;
};
TORCH_MODULE(AmpBlock);

/// Waveform generator G(z, style).
class GeneratorImpl : public torch::nn::Module {
 public:
  GeneratorImpl(int d_latent, int d_style, const GeneratorConfig& config);
  /// z: [B, d_latent, T], style: [B, d_style] -> [B, T * prod(upsample_rates)].
  torch::Tensor forward(const torch::Tensor& z, const torch::Tensor& style);
  int hop() const { return hop_; }
  void set_anti_aliasing(bool enabled);

 private:
  int hop_;
  torch::nn::Linear style_proj_{nullptr};
  torch::nn::Conv1d conv_pre_{nullptr}, conv_post_{nullptr};
  std::vector<torch::nn::ConvTranspose1d> ups_;
  std::vector<AmpBlock> amps_;
  AliasFreeSnake act_post_{nullptr};
};
TORCH_MODULE(Generator);

}  // namespace etts
