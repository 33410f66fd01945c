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

#include "etts/synthesizer.hpp"

#include "etts/checkpoint_keys.hpp"
#include "etts/error.hpp"

namespace etts {

SynthesizerNetworkImpl::SynthesizerNetworkImpl(const Config& config) : config_(config) {
  const auto& m = config.model;
  const auto& e = m.encoder;
  style = register_module("style", StyleEmbedding(e.n_styles, e.d_style));
  phoneme_encoder = register_module("phoneme_encoder", PhonemeEncoder(e));
  variance = register_module("variance", VarianceAdaptor(e.d_model, m.variance));
  frame_encoder = register_module("frame_encoder", FrameEncoder(e));
  prior_projection = register_module("prior_projection", PriorProjection(e.d_model, m.d_latent));
  flow = register_module("flow", FlowStack(m.d_latent, e.d_model, m.flow, e.d_style, e.d_model));
  decoder = register_module("decoder", Generator(m.d_latent, e.d_style, m.generator));
}

PriorPath SynthesizerNetworkImpl::encode(std::span<const int> phoneme_ids, int style_id,
                                         std::optional<std::span<const int>> durations,
                                         std::optional<std::span<const double>> pitch_hz,
                                         std::optional<std::span<const double>> range_hz) {
  ETTS_CHECK(!phoneme_ids.empty(), "synthesize: empty phoneme sequence");
  ETTS_CHECK(style_id >= 0 && style_id < config_.model.encoder.n_styles,
             "synthesize: style id " + std::to_string(style_id) + " out of range");
  PriorPath path;
  std::vector<long> ids(phoneme_ids.begin(), phoneme_ids.end());
  path.style = style(torch::tensor({static_cast<long>(style_id)}, torch::kLong));
  path.hidden = phoneme_encoder(torch::tensor(ids, torch::kLong).unsqueeze(0), path.style);
  path.variances = variance(path.hidden);

  if (durations) {
    ETTS_CHECK(durations->size() == phoneme_ids.size(), "synthesize: one duration per phoneme required");
    path.durations.assign(durations->begin(), durations->end());
  } else {
    path.durations = decode_durations(path.variances.log_duration);
  }

  auto to_vec = [](const torch::Tensor& t) {
    auto flat = t.detach().to(torch::kFloat64).reshape({-1}).contiguous();
    return std::vector<double>(flat.data_ptr<double>(), flat.data_ptr<double>() + flat.numel());
  };
  const auto pitch = pitch_hz ? std::vector<double>(pitch_hz->begin(), pitch_hz->end()) : to_vec(path.variances.pitch_hz);
  const auto range = range_hz ? std::vector<double>(range_hz->begin(), range_hz->end()) : to_vec(path.variances.range_hz);

  auto frames = length_regulate(path.hidden, path.durations);
  path.c = frame_encoder(frames, path.style, pitch, range, path.durations);
  path.prior = prior_projection(path.c);
  return path;
}

SynthesisResult synthesize(SynthesizerNetwork& network, const SynthesisRequest& request) {
  torch::NoGradGuard no_grad;
  const std::optional<std::span<const int>> durations =
      request.durations ? std::optional<std::span<const int>>(*request.durations) : std::nullopt;
  auto path = network->encode(request.phoneme_ids, request.style_id, durations);
  auto generator = make_generator(request.seed);
  auto e = sample_diag_normal(path.prior, request.noise_scale, generator);
  auto z = network->flow->inverse(e, path.c, path.style);
  auto wav = network->decoder(z, path.style).reshape({-1}).contiguous();
  SynthesisResult result;
  result.audio.assign(wav.data_ptr<float>(), wav.data_ptr<float>() + wav.numel());
  result.durations = std::move(path.durations);
  return result;
}

Config read_checkpoint_config(const std::filesystem::path& checkpoint) {
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(checkpoint.string());
  } catch (const c10::Error& e) {
    throw IoError("cannot read checkpoint " + checkpoint.string());
  }
  c10::IValue text;
  if (!archive.try_read(checkpoint_keys::kConfigText, text) || !text.isString())
    throw IoError(checkpoint.string() + ": checkpoint has no config");
  return Config::parse(text.toStringRef());
}

SynthesizerNetwork load_synthesizer(const std::filesystem::path& checkpoint) {
  const auto config = read_checkpoint_config(checkpoint);
  torch::serialize::InputArchive archive;
  archive.load_from(checkpoint.string());
  SynthesizerNetwork network(config);
  torch::serialize::InputArchive part;
  if (!archive.try_read(checkpoint_keys::kSynthesizer, part))
    throw IoError(checkpoint.string() + ": checkpoint has no synthesizer parameters");
  network->load(part);
  network->eval();
  return network;
}

}  // namespace etts
