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
#include "etts/gaussian.hpp"

namespace etts {

// Tensor layouts used throughout the encoders:
//   phoneme / frame sequences fed to attention: [B, T, d_model]
//   frame conditions, latents and stats:        [B, channels, T]

/// Global style condition: style id -> dense vector.
class StyleEmbeddingImpl : public torch::nn::Module {
 public:
  StyleEmbeddingImpl(int n_styles, int d_style);
  /// [B] int64 ids -> [B, d_style].
  torch::Tensor forward(const torch::Tensor& style_ids);
  int n_styles() const { return n_styles_; }

 private:
  int n_styles_;
  torch::nn::Embedding table_{nullptr};
};
TORCH_MODULE(StyleEmbedding);

/// Elementwise-gated recurrence used in place of a feed-forward sublayer:
///   h_t = swish(W x_t + b + tanh(r) * h_{t-1}),  y_t = W_o h_t.
class SwishRnnImpl : public torch::nn::Module {
 public:
  explicit SwishRnnImpl(int d_model);
  torch::Tensor forward(const torch::Tensor& x);
  /// The scan alone, over pre-projected inputs u: [B, T, d].
  torch::Tensor scan(const torch::Tensor& u) const;
  torch::Tensor recurrence_weight() const { return torch::tanh(recurrence_raw_); }

  torch::nn::Linear input{nullptr};
  torch::nn::Linear output{nullptr};

 private:
  torch::Tensor recurrence_raw_;
};
TORCH_MODULE(SwishRnn);

/// Pre-norm Transformer block whose feed-forward sublayer is a SwishRnn.
class SwishRnnBlockImpl : public torch::nn::Module {
 public:
  SwishRnnBlockImpl(int d_model, int n_heads);
  torch::Tensor forward(const torch::Tensor& x);
  /// Zeroes both residual output projections: the block becomes the identity.
  void zero_output_projections();

 private:
  torch::nn::LayerNorm attn_norm_{nullptr}, rnn_norm_{nullptr};
  torch::nn::MultiheadAttention attn_{nullptr};
  SwishRnn rnn_{nullptr};
};
TORCH_MODULE(SwishRnnBlock);

/// Phoneme-level linguistic encoder.
class PhonemeEncoderImpl : public torch::nn::Module {
 public:
  explicit PhonemeEncoderImpl(const EncoderConfig& config);
  /// ids: [B, T] int64, style: [B, d_style] -> [B, T, d_model].
  torch::Tensor forward(const torch::Tensor& phoneme_ids, const torch::Tensor& style);
  SwishRnnBlock block(std::size_t i) const { return blocks_[i]; }
  std::size_t num_blocks() const { return blocks_.size(); }

 private:
  EncoderConfig config_;
  torch::nn::Embedding embedding_{nullptr};
  torch::nn::Linear style_proj_{nullptr};
  std::vector<SwishRnnBlock> blocks_;
  torch::nn::LayerNorm final_norm_{nullptr};
};
TORCH_MODULE(PhonemeEncoder);

/// Repeats each phoneme vector durations[i] times along dim -2:
/// [..., T, C] -> [..., sum(durations), C].
torch::Tensor length_regulate(const torch::Tensor& hidden, std::span<const int> durations);

/// Sinusoidal position table, [length, dim].
torch::Tensor positional_encoding(long length, int dim);

/// Per-channel instance normalisation over time followed by gamma * x + beta.
/// x: [B, C, T] with T >= 2; gamma, beta: [B, C].
torch::Tensor instance_normalize(const torch::Tensor& x, const torch::Tensor& gamma, const torch::Tensor& beta,
                                 double eps = 1e-5);

/// Style-adaptive instance normalisation: gamma = 1 + A_g s, beta = A_b s.
class SainImpl : public torch::nn::Module {
 public:
  SainImpl(int channels, int d_style);
  /// x: [B, C, T], style: [B, d_style].
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& style);
  std::pair<torch::Tensor, torch::Tensor> affine(const torch::Tensor& style);

  torch::nn::Linear style_affine{nullptr};

 private:
  int channels_;
};
TORCH_MODULE(Sain);

/// Pre-norm attention + convolutional feed-forward block over frames.
class ConvTransformerBlockImpl : public torch::nn::Module {
 public:
  ConvTransformerBlockImpl(int d_model, int n_heads, int kernel);
  /// [B, T, d] -> [B, T, d].
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::LayerNorm attn_norm_{nullptr}, conv_norm_{nullptr};
  torch::nn::MultiheadAttention attn_{nullptr};
  torch::nn::Conv1d conv1_{nullptr}, conv2_{nullptr};
};
TORCH_MODULE(ConvTransformerBlock);

/// Quantised pitch id: 0 for unvoiced (hz <= 0), else 1 + log-spaced bin.
long pitch_bin(double hz, const EncoderConfig& config);
long range_bin(double hz, const EncoderConfig& config);

/// Frame-level SAIN encoder producing the condition sequence c.
class FrameEncoderImpl : public torch::nn::Module {
 public:
  explicit FrameEncoderImpl(const EncoderConfig& config);
  /// frames: [1, F, d_model] (length-regulated), style: [1, d_style],
  /// pitch / range: per-phoneme Hz. Returns c: [1, d_model, F].
  torch::Tensor forward(const torch::Tensor& frames, const torch::Tensor& style, std::span<const double> pitch_hz,
                        std::span<const double> range_hz, std::span<const int> durations);
  Sain sain(std::size_t i) const { return sains_[i]; }

 private:
  EncoderConfig config_;
  torch::nn::Embedding pitch_embedding_{nullptr}, range_embedding_{nullptr};
  std::vector<ConvTransformerBlock> blocks_;
  std::vector<Sain> sains_;
};
TORCH_MODULE(FrameEncoder);

/// Linear map from c to (mu_theta, log sigma_theta).
class PriorProjectionImpl : public torch::nn::Module {
 public:
  PriorProjectionImpl(int d_model, int d_latent);
  PriorStats forward(const torch::Tensor& c);

  torch::nn::Conv1d proj{nullptr};

 private:
  int d_latent_;
};
TORCH_MODULE(PriorProjection);

}  // namespace etts
