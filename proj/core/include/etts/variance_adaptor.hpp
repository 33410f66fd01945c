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

#include <span>
#include <vector>

#include "etts/config.hpp"

namespace etts {

/// Per-phoneme predictions, each [B, T].
struct VariancePrediction {
  torch::Tensor log_duration;
  torch::Tensor pitch_hz;
  torch::Tensor range_hz;
};

/// Per-phoneme training targets for one utterance.
struct VarianceTargets {
  std::vector<int> durations;
  std::vector<double> pitch_hz;  // 0 marks a phoneme without voiced frames
  std::vector<double> range_hz;
};

/// conv -> relu -> layer norm -> dropout, twice, then a scalar head.
class VarianceTowerImpl : public torch::nn::Module {
 public:
  VarianceTowerImpl(int d_in, const VarianceConfig& config);
  /// [B, T, d_in] -> [B, T].
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Linear head{nullptr};

 private:
  torch::nn::Conv1d conv1_{nullptr}, conv2_{nullptr};
  torch::nn::LayerNorm norm1_{nullptr}, norm2_{nullptr};
  torch::nn::Dropout dropout_{nullptr};
};
TORCH_MODULE(VarianceTower);

/// Duration, pitch and pitch-range predictors. The encoder output is
/// detached, so these losses never reach the phoneme encoder.
class VarianceAdaptorImpl : public torch::nn::Module {
 public:
  VarianceAdaptorImpl(int d_model, const VarianceConfig& config);
  VariancePrediction forward(const torch::Tensor& hidden);

  VarianceTower duration{nullptr}, pitch{nullptr}, range{nullptr};

 private:
  double pitch_scale_;
};
TORCH_MODULE(VarianceAdaptor);

/// max(1, round(exp(log_duration))) for a single utterance ([1, T] or [T]).
std::vector<int> decode_durations(const torch::Tensor& log_duration);

/// MSE of log durations plus voiced-masked MSE of pitch and range, the
/// latter two measured in units of `pitch_scale_hz`. Expects B == 1.
torch::Tensor variance_losses(const VariancePrediction& prediction, const VarianceTargets& targets,
                              double pitch_scale_hz);

}  // namespace etts
