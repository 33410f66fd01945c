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

#include "etts/prior_encoder.hpp"

#include <algorithm>
#include <cmath>

#include "etts/error.hpp"

namespace etts {
namespace nn = torch::nn;

StyleEmbeddingImpl::StyleEmbeddingImpl(int n_styles, int d_style) : n_styles_(n_styles) {
  table_ = register_module("table", nn::Embedding(n_styles, d_style));
}

torch::Tensor StyleEmbeddingImpl::forward(const torch::Tensor& style_ids) {
  ETTS_CHECK(style_ids.numel() > 0, "style embedding: no ids");
  const auto lo = style_ids.min().item<long>();
  const auto hi = style_ids.max().item<long>();
  ETTS_CHECK(lo >= 0 && hi < n_styles_, "style id out of range [0, " + std::to_string(n_styles_) + ")");
  return table_(style_ids);
}

SwishRnnImpl::SwishRnnImpl(int d_model) {
  input = register_module("input", nn::Linear(d_model, d_model));
  output = register_module("output", nn::Linear(d_model, d_model));
  recurrence_raw_ = register_parameter("recurrence", torch::empty({d_model}).uniform_(-0.5, 0.5));
}

torch::Tensor SwishRnnImpl::scan(const torch::Tensor& u) const {
  const auto r = torch::tanh(recurrence_raw_);
  auto h = torch::zeros({u.size(0), u.size(2)}, u.options());
  std::vector<torch::Tensor> states;
  states.reserve(u.size(1));
  for (long t = 0; t < u.size(1); ++t) {
    h = torch::silu(u.select(1, t) + r * h);
    states.push_back(h);
  }
  return torch::stack(states, 1);
}

torch::Tensor SwishRnnImpl::forward(const torch::Tensor& x) { return output(scan(input(x))); }

SwishRnnBlockImpl::SwishRnnBlockImpl(int d_model, int n_heads) {
  attn_norm_ = register_module("attn_norm", nn::LayerNorm(nn::LayerNormOptions({d_model})));
  attn_ = register_module("attn", nn::MultiheadAttention(nn::MultiheadAttentionOptions(d_model, n_heads)));
  rnn_norm_ = register_module("rnn_norm", nn::LayerNorm(nn::LayerNormOptions({d_model})));
  rnn_ = register_module("rnn", SwishRnn(d_model));
}

torch::Tensor SwishRnnBlockImpl::forward(const torch::Tensor& x) {
  auto q = attn_norm_(x).transpose(0, 1);
  auto attended = std::get<0>(attn_->forward(q, q, q, torch::Tensor(), /*need_weights=*/false)).transpose(0, 1);
  auto y = x + attended;
  return y + rnn_(rnn_norm_(y));
}

void SwishRnnBlockImpl::zero_output_projections() {
  torch::NoGradGuard no_grad;
  attn_->out_proj->weight.zero_();
  attn_->out_proj->bias.zero_();
  rnn_->output->weight.zero_();
  rnn_->output->bias.zero_();
}

torch::Tensor positional_encoding(long length, int dim) {
  auto pos = torch::arange(length, torch::kFloat32).unsqueeze(1);
  auto idx = torch::arange(0, dim, 2, torch::kFloat32);
  auto freq = torch::exp(idx * (-std::log(10000.0) / dim));
  auto table = torch::zeros({length, dim});
  table.index_put_({torch::indexing::Slice(), torch::indexing::Slice(0, torch::indexing::None, 2)},
                   torch::sin(pos * freq));
  table.index_put_({torch::indexing::Slice(), torch::indexing::Slice(1, torch::indexing::None, 2)},
                   torch::cos(pos * freq).narrow(1, 0, dim / 2));
  return table;
}

PhonemeEncoderImpl::PhonemeEncoderImpl(const EncoderConfig& config) : config_(config) {
  embedding_ = register_module("embedding", nn::Embedding(config.n_phonemes, config.d_model));
  style_proj_ = register_module("style_proj", nn::Linear(config.d_style, config.d_model));
  for (int i = 0; i < config.phoneme_blocks; ++i)
    blocks_.push_back(register_module("block" + std::to_string(i), SwishRnnBlock(config.d_model, config.n_heads)));
  final_norm_ = register_module("final_norm", nn::LayerNorm(nn::LayerNormOptions({config.d_model})));
}

torch::Tensor PhonemeEncoderImpl::forward(const torch::Tensor& phoneme_ids, const torch::Tensor& style) {
  ETTS_CHECK(phoneme_ids.dim() == 2 && phoneme_ids.size(1) > 0, "encode_phonemes: expected non-empty [B, T] ids");
  ETTS_CHECK(style.dim() == 2 && style.size(0) == phoneme_ids.size(0), "encode_phonemes: style batch mismatch");
  const auto lo = phoneme_ids.min().item<long>();
  const auto hi = phoneme_ids.max().item<long>();
  ETTS_CHECK(lo >= 0 && hi < config_.n_phonemes,
             "encode_phonemes: phoneme id out of range [0, " + std::to_string(config_.n_phonemes) + ")");
  auto x = embedding_(phoneme_ids) + style_proj_(style).unsqueeze(1) +
           positional_encoding(phoneme_ids.size(1), config_.d_model).to(style.device()).unsqueeze(0);
  for (auto& block : blocks_) x = block(x);
  return final_norm_(x);
}

torch::Tensor length_regulate(const torch::Tensor& hidden, std::span<const int> durations) {
  ETTS_CHECK(hidden.dim() >= 2, "length_regulate: hidden must be [..., T, C]");
  ETTS_CHECK(static_cast<long>(durations.size()) == hidden.size(-2),
             "length_regulate: " + std::to_string(durations.size()) + " durations for " +
                 std::to_string(hidden.size(-2)) + " phonemes");
  std::vector<long> reps(durations.begin(), durations.end());
  for (long d : reps) ETTS_CHECK(d > 0, "length_regulate: durations must be positive");
  auto repeats = torch::tensor(reps, torch::kLong).to(hidden.device());
  return torch::repeat_interleave(hidden, repeats, hidden.dim() - 2);
}

torch::Tensor instance_normalize(const torch::Tensor& x, const torch::Tensor& gamma, const torch::Tensor& beta,
                                 double eps) {
  ETTS_CHECK(x.dim() == 3, "sain: expected [B, C, T]");
  ETTS_CHECK(x.size(2) >= 2, "sain: need at least 2 frames");
  auto mean = x.mean(2, true);
  auto var = (x - mean).pow(2).mean(2, true);
  auto normalized = (x - mean) / torch::sqrt(var + eps);
  return gamma.unsqueeze(2) * normalized + beta.unsqueeze(2);
}

SainImpl::SainImpl(int channels, int d_style) : channels_(channels) {
  style_affine = register_module("style_affine", nn::Linear(d_style, 2 * channels));
}

std::pair<torch::Tensor, torch::Tensor> SainImpl::affine(const torch::Tensor& style) {
  auto params = style_affine(style);
  auto parts = params.split(channels_, 1);
  return {1.0 + parts[0], parts[1]};
}

torch::Tensor SainImpl::forward(const torch::Tensor& x, const torch::Tensor& style) {
  auto [gamma, beta] = affine(style);
  return instance_normalize(x, gamma, beta);
}

ConvTransformerBlockImpl::ConvTransformerBlockImpl(int d_model, int n_heads, int kernel) {
  attn_norm_ = register_module("attn_norm", nn::LayerNorm(nn::LayerNormOptions({d_model})));
  attn_ = register_module("attn", nn::MultiheadAttention(nn::MultiheadAttentionOptions(d_model, n_heads)));
  conv_norm_ = register_module("conv_norm", nn::LayerNorm(nn::LayerNormOptions({d_model})));
  conv1_ = register_module("conv1", nn::Conv1d(nn::Conv1dOptions(d_model, d_model, kernel).padding(kernel / 2)));
  conv2_ = register_module("conv2", nn::Conv1d(nn::Conv1dOptions(d_model, d_model, 1)));
}

torch::Tensor ConvTransformerBlockImpl::forward(const torch::Tensor& x) {
  auto q = attn_norm_(x).transpose(0, 1);
  auto y = x + std::get<0>(attn_->forward(q, q, q, torch::Tensor(), /*need_weights=*/false)).transpose(0, 1);
  auto h = conv_norm_(y).transpose(1, 2);
  h = conv2_(torch::relu(conv1_(h)));
  return y + h.transpose(1, 2);
}

long pitch_bin(double hz, const EncoderConfig& config) {
  if (hz <= 0.0) return 0;
  const double pos = std::log(hz / config.pitch_min_hz) / std::log(config.pitch_max_hz / config.pitch_min_hz);
  const long bin = static_cast<long>(std::floor(pos * config.pitch_bins));
  return 1 + std::clamp<long>(bin, 0, config.pitch_bins - 1);
}

long range_bin(double hz, const EncoderConfig& config) {
  const long bin = static_cast<long>(std::floor(std::max(0.0, hz) / config.range_max_hz * config.range_bins));
  return std::clamp<long>(bin, 0, config.range_bins - 1);
}

FrameEncoderImpl::FrameEncoderImpl(const EncoderConfig& config) : config_(config) {
  pitch_embedding_ = register_module("pitch_embedding", nn::Embedding(config.pitch_bins + 1, config.d_model));
  range_embedding_ = register_module("range_embedding", nn::Embedding(config.range_bins, config.d_model));
  for (int i = 0; i < config.frame_blocks; ++i) {
    blocks_.push_back(register_module("block" + std::to_string(i),
                                      ConvTransformerBlock(config.d_model, config.n_heads, config.conv_kernel)));
    sains_.push_back(register_module("sain" + std::to_string(i), Sain(config.d_model, config.d_style)));
  }
}

torch::Tensor FrameEncoderImpl::forward(const torch::Tensor& frames, const torch::Tensor& style,
                                        std::span<const double> pitch_hz, std::span<const double> range_hz,
                                        std::span<const int> durations) {
  ETTS_CHECK(frames.dim() == 3 && frames.size(0) == 1, "encode_frames: expected [1, F, d_model]");
  ETTS_CHECK(pitch_hz.size() == durations.size() && range_hz.size() == durations.size(),
             "encode_frames: pitch/range/duration lengths differ");
  long total = 0;
  for (int d : durations) total += d;
  ETTS_CHECK(total == frames.size(1), "encode_frames: frame count " + std::to_string(frames.size(1)) +
                                          " != sum(durations) " + std::to_string(total));
  std::vector<long> p_ids, r_ids;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    p_ids.push_back(pitch_bin(pitch_hz[i], config_));
    r_ids.push_back(range_bin(range_hz[i], config_));
  }
  auto opts = torch::TensorOptions().dtype(torch::kLong).device(frames.device());
  auto prosody = pitch_embedding_(torch::tensor(p_ids, opts)) + range_embedding_(torch::tensor(r_ids, opts));
  auto x = frames + length_regulate(prosody, durations).unsqueeze(0);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    x = blocks_[i](x);
    x = sains_[i](x.transpose(1, 2), style).transpose(1, 2);
  }
  return x.transpose(1, 2).contiguous();
}

PriorProjectionImpl::PriorProjectionImpl(int d_model, int d_latent) : d_latent_(d_latent) {
  proj = register_module("proj", nn::Conv1d(nn::Conv1dOptions(d_model, 2 * d_latent, 1)));
}

PriorStats PriorProjectionImpl::forward(const torch::Tensor& c) {
  ETTS_CHECK(c.dim() == 3 && c.size(2) > 0, "project_prior: expected non-empty [B, d_model, F]");
  auto stats = proj(c).split(d_latent_, 1);
  PriorStats out;
  out.mean = stats[0];
  out.log_std = stats[1];
  return out;
}

}  // namespace etts
