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

#include "etts/wavenet.hpp"

#include "etts/error.hpp"

namespace etts {
namespace nn = torch::nn;

WaveNetImpl::WaveNetImpl(const WaveNetOptions& options) : options_(options) {
  const int h = options.hidden;
  int dilation = 1;
  for (int i = 0; i < options.layers; ++i) {
    const int padding = (options.kernel * dilation - dilation) / 2;
    in_layers_.push_back(register_module(
        "in" + std::to_string(i),
        nn::Conv1d(nn::Conv1dOptions(h, 2 * h, options.kernel).dilation(dilation).padding(padding))));
    const int out = i + 1 < options.layers ? 2 * h : h;
    res_skip_layers_.push_back(
        register_module("res_skip" + std::to_string(i), nn::Conv1d(nn::Conv1dOptions(h, out, 1))));
    dilation *= options.dilation_rate;
  }
  if (options.global_channels > 0)
    global_proj_ = register_module("global_proj", nn::Linear(options.global_channels, 2 * h * options.layers));
  if (options.frame_channels > 0)
    frame_proj_ = register_module("frame_proj",
                                  nn::Conv1d(nn::Conv1dOptions(options.frame_channels, 2 * h * options.layers, 1)));
}

torch::Tensor WaveNetImpl::forward(const torch::Tensor& x, const torch::Tensor& global, const torch::Tensor& frames) {
  const int h = options_.hidden;
  torch::Tensor g, f;
  if (global_proj_ && global.defined()) g = global_proj_(global).unsqueeze(2);
  if (frame_proj_ && frames.defined()) {
    ETTS_CHECK(frames.size(2) == x.size(2), "wavenet: frame condition length mismatch");
    f = frame_proj_(frames);
  }
  auto out = torch::zeros_like(x);
  auto hidden = x;
  for (int i = 0; i < options_.layers; ++i) {
    auto act = in_layers_[i](hidden);
    if (g.defined()) act = act + g.narrow(1, 2 * h * i, 2 * h);
    if (f.defined()) act = act + f.narrow(1, 2 * h * i, 2 * h);
    auto gated = torch::tanh(act.narrow(1, 0, h)) * torch::sigmoid(act.narrow(1, h, h));
    auto rs = res_skip_layers_[i](gated);
    if (i + 1 < options_.layers) {
      hidden = hidden + rs.narrow(1, 0, h);
      out = out + rs.narrow(1, h, h);
    } else {
      out = out + rs;
    }
  }
  return out;
}

}  // namespace etts
