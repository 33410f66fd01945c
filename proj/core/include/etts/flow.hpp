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

#include <utility>
#include <vector>

#include "etts/config.hpp"
#include "etts/gaussian.hpp"
#include "etts/wavenet.hpp"

namespace etts {

/// Result of the forward flow direction: e = f(z) and per-frame log|det J|.
struct FlowOutput {
  torch::Tensor e;       // [B, C, T]
  torch::Tensor logdet;  // [B, T]
};

/// Affine coupling: the first floor(C/2) channels pass through and drive a
/// WaveNet conditioner that shifts (and in affine mode scales) the rest.
/// Log-scales are bounded by 5 * tanh(raw / 5).
class CouplingLayerImpl : public torch::nn::Module {
 public:
  CouplingLayerImpl(int channels, int hidden, const FlowConfig& config, int style_channels, int frame_channels);

  FlowOutput forward(const torch::Tensor& x, const torch::Tensor& style, const torch::Tensor& c);
  torch::Tensor inverse(const torch::Tensor& y, const torch::Tensor& style, const torch::Tensor& c);

  /// Shift m and log-scale for a given pass-through half.
  std::pair<torch::Tensor, torch::Tensor> shift_and_log_scale(const torch::Tensor& x0, const torch::Tensor& style,
                                                              const torch::Tensor& c);

  int passthrough_channels() const { return half_; }
  torch::nn::Conv1d post{nullptr};

 private:
  int half_;
  int rest_;
  bool mean_only_;
  torch::nn::Conv1d pre_{nullptr};
  WaveNet conditioner_{nullptr};
};
TORCH_MODULE(CouplingLayer);

/// f_theta: coupling layers separated by channel flips.
class FlowStackImpl : public torch::nn::Module {
 public:
  /// `frame_channels` is the width of c (ignored unless condition_on_frames).
  FlowStackImpl(int channels, int hidden, const FlowConfig& config, int style_channels, int frame_channels);

  /// z: [B, C, T], c: [B, d_model, T] (may be undefined when unconditioned),
  /// style: [B, d_style].
  FlowOutput forward(const torch::Tensor& z, const torch::Tensor& c, const torch::Tensor& style);
  torch::Tensor inverse(const torch::Tensor& e, const torch::Tensor& c, const torch::Tensor& style);

  std::size_t size() const { return layers_.size(); }
  CouplingLayer layer(std::size_t i) const { return layers_[i]; }
  /// Zeroes every conditioner output layer, making the flow the identity.
  void zero_output_layers();

 private:
  void check(const torch::Tensor& x, const torch::Tensor& c) const;

  int channels_;
  bool use_frames_;
  std::vector<CouplingLayer> layers_;
};
TORCH_MODULE(FlowStack);

/// log p(z | c) = log N(f(z); mu, sigma) + log|det df/dz|, per frame [B, T].
torch::Tensor prior_log_density(FlowStack& flow, const torch::Tensor& z, const torch::Tensor& c,
                                const torch::Tensor& style, const PriorStats& stats);

}  // namespace etts
