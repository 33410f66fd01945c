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

#include "etts/config.hpp"
#include "etts/gaussian.hpp"
#include "etts/prior_encoder.hpp"
#include "etts/wavenet.hpp"

namespace etts {

/// q_phi(z | x) over linear spectrograms. Training only.
class PosteriorEncoderImpl : public torch::nn::Module {
 public:
  PosteriorEncoderImpl(int linear_bins, int d_latent, int d_style, const PosteriorConfig& config);
  /// x: [B, bins, T] with T >= 2, style: [B, d_style].
  PosteriorStats forward(const torch::Tensor& x, const torch::Tensor& style);

  torch::nn::Conv1d proj{nullptr};
  Sain sain{nullptr};

 private:
  int d_latent_;
  torch::nn::Conv1d pre_{nullptr};
  WaveNet wavenet_{nullptr};
};
TORCH_MODULE(PosteriorEncoder);

/// z = mu + noise_scale * sigma * eps; deterministic given the generator state.
torch::Tensor sample_latent(const PosteriorStats& stats, double noise_scale, torch::Generator& generator);

/// Diagonal-normal log q(z | x), summed over channels: [B, T].
torch::Tensor posterior_log_density(const torch::Tensor& z, const PosteriorStats& stats);

}  // namespace etts
