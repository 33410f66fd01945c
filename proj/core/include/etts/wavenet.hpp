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

namespace etts {

struct WaveNetOptions {
  int hidden = 192;
  int kernel = 5;
  int dilation_rate = 1;
  int layers = 4;
  int global_channels = 0;  // style vector size; 0 disables the global condition
  int frame_channels = 0;   // frame-aligned condition channels; 0 disables it
};

/// Non-causal WaveNet stack: dilated convolutions with tanh * sigmoid gates,
/// residual and skip connections. Conditions are added inside every gate.
class WaveNetImpl : public torch::nn::Module {
 public:
  explicit WaveNetImpl(const WaveNetOptions& options);
  /// x: [B, hidden, T]; global: [B, global_channels] or undefined;
  /// frames: [B, frame_channels, T] or undefined. Returns the skip sum.
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& global = {}, const torch::Tensor& frames = {});

  const WaveNetOptions& options() const { return options_; }

 private:
  WaveNetOptions options_;
  std::vector<torch::nn::Conv1d> in_layers_;
  std::vector<torch::nn::Conv1d> res_skip_layers_;
  torch::nn::Linear global_proj_{nullptr};
  torch::nn::Conv1d frame_proj_{nullptr};
};
TORCH_MODULE(WaveNet);

}  // namespace etts
