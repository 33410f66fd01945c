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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "etts/config.hpp"
#include "etts/decoder.hpp"
#include "etts/flow.hpp"
#include "etts/gaussian.hpp"
#include "etts/prior_encoder.hpp"
#include "etts/variance_adaptor.hpp"
#include "etts/wav.hpp"

namespace etts {

/// Prior-side intermediate results for one utterance.
struct PriorPath {
  torch::Tensor style;    // [1, d_style]
  torch::Tensor hidden;   // [1, T_ph, d_model]
  VariancePrediction variances;
  std::vector<int> durations;
  torch::Tensor c;        // [1, d_model, F]
  PriorStats prior;       // [1, d_latent, F]
};

/// Everything needed at inference time: style table, phoneme encoder,
/// variance predictors, frame encoder, prior projection, flow and decoder.
class SynthesizerNetworkImpl : public torch::nn::Module {
 public:
  explicit SynthesizerNetworkImpl(const Config& config);

  /// Prior path. When durations / pitch / range are given they replace the
  /// predictions (teacher forcing); otherwise predictions are decoded.
  PriorPath encode(std::span<const int> phoneme_ids, int style_id,
                   std::optional<std::span<const int>> durations = std::nullopt,
                   std::optional<std::span<const double>> pitch_hz = std::nullopt,
                   std::optional<std::span<const double>> range_hz = std::nullopt);

  const Config& config() const { return config_; }

  StyleEmbedding style{nullptr};
  PhonemeEncoder phoneme_encoder{nullptr};
  VarianceAdaptor variance{nullptr};
  FrameEncoder frame_encoder{nullptr};
  PriorProjection prior_projection{nullptr};
  FlowStack flow{nullptr};
  Generator decoder{nullptr};

 private:
  Config config_;
};
TORCH_MODULE(SynthesizerNetwork);

struct SynthesisRequest {
  std::vector<int> phoneme_ids;
  int style_id = 0;
  double noise_scale = 0.667;
  std::uint64_t seed = 0;
  std::optional<std::vector<int>> durations;  // ground-truth durations, if any
};

struct SynthesisResult {
  Waveform audio;
  std::vector<int> durations;
};

/// Samples e ~ N(mu, noise_scale * sigma), inverts the flow and decodes.
SynthesisResult synthesize(SynthesizerNetwork& network, const SynthesisRequest& request);

/// Reads the config stored in a checkpoint.
Config read_checkpoint_config(const std::filesystem::path& checkpoint);

/// Builds the inference network from a checkpoint, in eval mode.
SynthesizerNetwork load_synthesizer(const std::filesystem::path& checkpoint);

}  // namespace etts
