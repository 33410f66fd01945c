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

#include "etts/variance_adaptor.hpp"

#include <algorithm>
#include <cmath>

#include "etts/error.hpp"

namespace etts {
namespace nn = torch::nn;

VarianceTowerImpl::VarianceTowerImpl(int d_in, const VarianceConfig& config) {
  const int f = config.filter_channels;
  conv1_ = register_module("conv1", nn::Conv1d(nn::Conv1dOptions(d_in, f, config.kernel).padding(config.kernel / 2)));
  norm1_ = register_module("norm1", nn::LayerNorm(nn::LayerNormOptions({f})));
  conv2_ = register_module("conv2", nn::Conv1d(nn::Conv1dOptions(f, f, config.kernel).padding(config.kernel / 2)));
  norm2_ = register_module("norm2", nn::LayerNorm(nn::LayerNormOptions({f})));
  dropout_ = register_module("dropout", nn::Dropout(config.dropout));
  head = register_module("head", nn::Linear(f, 1));
}

torch::Tensor VarianceTowerImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(conv1_(x.transpose(1, 2))).transpose(1, 2);
  h = dropout_(norm1_(h));
  h = torch::relu(conv2_(h.transpose(1, 2))).transpose(1, 2);
  h = dropout_(norm2_(h));
  return head(h).squeeze(-1);
}

VarianceAdaptorImpl::VarianceAdaptorImpl(int d_model, const VarianceConfig& config)
    : pitch_scale_(config.pitch_scale_hz) {
  duration = register_module("duration", VarianceTower(d_model, config));
  pitch = register_module("pitch", VarianceTower(d_model, config));
  range = register_module("range", VarianceTower(d_model, config));
}

VariancePrediction VarianceAdaptorImpl::forward(const torch::Tensor& hidden) {
  ETTS_CHECK(hidden.dim() == 3 && hidden.size(1) > 0, "predict_variances: expected non-empty [B, T, d]");
  auto h = hidden.detach();
  return {duration(h), pitch_scale_ * pitch(h), pitch_scale_ * range(h)};
}

std::vector<int> decode_durations(const torch::Tensor& log_duration) {
  auto flat = log_duration.detach().to(torch::kFloat64).reshape({-1}).contiguous();
  std::vector<int> out(flat.numel());
  const double* p = flat.data_ptr<double>();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = std::isfinite(p[i]) ? std::round(std::exp(std::min(p[i], 10.0))) : 1.0;
    out[i] = std::max(1, static_cast<int>(d));
  }
  return out;
}

torch::Tensor variance_losses(const VariancePrediction& prediction, const VarianceTargets& targets,
                              double pitch_scale_hz) {
  const auto n = static_cast<long>(targets.durations.size());
  ETTS_CHECK(prediction.log_duration.numel() == n && prediction.pitch_hz.numel() == n &&
                 prediction.range_hz.numel() == n,
             "variance_losses: prediction length does not match targets");
  ETTS_CHECK(static_cast<long>(targets.pitch_hz.size()) == n && static_cast<long>(targets.range_hz.size()) == n,
             "variance_losses: target lengths differ");
  const auto opts = prediction.log_duration.options().requires_grad(false);
  std::vector<float> log_dur, pitch, range, mask;
  for (long i = 0; i < n; ++i) {
    log_dur.push_back(static_cast<float>(std::log(static_cast<double>(targets.durations[i]))));
    pitch.push_back(static_cast<float>(targets.pitch_hz[i] / pitch_scale_hz));
    range.push_back(static_cast<float>(targets.range_hz[i] / pitch_scale_hz));
    mask.push_back(targets.pitch_hz[i] > 0.0 ? 1.0f : 0.0f);
  }
  auto t_dur = torch::tensor(log_dur, opts);
  auto t_pitch = torch::tensor(pitch, opts);
  auto t_range = torch::tensor(range, opts);
  auto t_mask = torch::tensor(mask, opts);

  auto loss = (prediction.log_duration.reshape({-1}) - t_dur).pow(2).mean();
  const double voiced = t_mask.sum().item<double>();
  if (voiced > 0.0) {
    loss = loss + ((prediction.pitch_hz.reshape({-1}) / pitch_scale_hz - t_pitch).pow(2) * t_mask).sum() / voiced;
    loss = loss + ((prediction.range_hz.reshape({-1}) / pitch_scale_hz - t_range).pow(2) * t_mask).sum() / voiced;
  }
  return loss;
}

}  // namespace etts
