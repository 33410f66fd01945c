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

#include "etts/losses.hpp"

#include <json.hpp>

#include "etts/error.hpp"
#include "etts/features.hpp"

namespace etts {

torch::Tensor kl_loss(const torch::Tensor& z, const PosteriorStats& posterior, const FlowOutput& flowed,
                      const PriorStats& prior) {
  ETTS_CHECK(z.sizes() == posterior.mean.sizes() && flowed.e.sizes() == z.sizes() &&
                 prior.mean.sizes() == z.sizes(),
             "kl_loss: shape mismatch between latent, posterior, flow output and prior");
  auto log_q = diag_normal_log_density(z, posterior);
  auto log_p = diag_normal_log_density(flowed.e, prior) + flowed.logdet;
  return (log_q - log_p).sum() / static_cast<double>(z.numel());
}

torch::Tensor kl_loss(const torch::Tensor& z, const PosteriorStats& posterior, FlowStack& flow,
                      const torch::Tensor& c, const torch::Tensor& style, const PriorStats& prior) {
  return kl_loss(z, posterior, flow(z, c, style), prior);
}

torch::Tensor generator_adversarial_loss(const DiscriminatorOutputs& fake) {
  ETTS_CHECK(!fake.empty(), "adversarial loss: no discriminator outputs");
  torch::Tensor loss;
  for (const auto& f : fake) {
    auto term = (f.score - 1.0).pow(2).mean();
    loss = loss.defined() ? loss + term : term;
  }
  return loss;
}

torch::Tensor discriminator_adversarial_loss(const DiscriminatorOutputs& real, const DiscriminatorOutputs& fake) {
  ETTS_CHECK(!real.empty() && real.size() == fake.size(), "adversarial loss: sub-discriminator count mismatch");
  torch::Tensor loss;
  for (std::size_t k = 0; k < real.size(); ++k) {
    auto term = (real[k].score - 1.0).pow(2).mean() + fake[k].score.pow(2).mean();
    loss = loss.defined() ? loss + term : term;
  }
  return loss;
}

AdversarialLosses adversarial_losses(const DiscriminatorOutputs& real, const DiscriminatorOutputs& fake) {
  return {generator_adversarial_loss(fake), discriminator_adversarial_loss(real, fake)};
}

torch::Tensor feature_matching_loss(const DiscriminatorOutputs& real, const DiscriminatorOutputs& fake) {
  ETTS_CHECK(real.size() == fake.size(), "feature matching: sub-discriminator count mismatch");
  torch::Tensor loss;
  for (std::size_t k = 0; k < real.size(); ++k) {
    ETTS_CHECK(real[k].features.size() == fake[k].features.size(), "feature matching: layer count mismatch");
    for (std::size_t l = 0; l < real[k].features.size(); ++l) {
      const auto& r = real[k].features[l];
      const auto& f = fake[k].features[l];
      ETTS_CHECK(r.sizes() == f.sizes(), "feature matching: feature map shape mismatch");
      auto term = (r.detach() - f).abs().mean();
      loss = loss.defined() ? loss + term : term;
    }
  }
  ETTS_CHECK(loss.defined(), "feature matching: no feature maps");
  return loss;
}

MelLoss::MelLoss(const AudioConfig& config) : config_(config), filterbank_(dsp::mel_filterbank(config)) {}

torch::Tensor MelLoss::log_mel(const torch::Tensor& waveform) const {
  auto linear = dsp::stft_magnitude(waveform, config_.fft_size, config_.hop_size, config_.win_size);
  return dsp::log_mel(linear, filterbank_);
}

torch::Tensor MelLoss::operator()(const torch::Tensor& fake, const torch::Tensor& real) const {
  ETTS_CHECK(fake.sizes() == real.sizes(), "mel_loss: waveform lengths differ");
  return (log_mel(fake) - log_mel(real.detach())).abs().mean();
}

std::string LossReport::to_json() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["kl"] = kl;
  j["adv_g"] = adv_g;
  j["adv_d"] = adv_d;
  j["fm"] = fm;
  j["mel"] = mel;
  j["variance"] = variance;
  j["total_g"] = total_g;
  j["total_d"] = total_d;
  j["lr"] = learning_rate;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

LossReport LossReport::from_json(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  LossReport r;
  r.step = j.at("step").get<long>();
  r.kl = j.at("kl").get<double>();
  r.adv_g = j.at("adv_g").get<double>();
  r.adv_d = j.at("adv_d").get<double>();
  r.fm = j.at("fm").get<double>();
  r.mel = j.at("mel").get<double>();
  r.variance = j.at("variance").get<double>();
  r.total_g = j.at("total_g").get<double>();
  r.total_d = j.at("total_d").get<double>();
  r.learning_rate = j.at("lr").get<double>();
  return r;
}

double total_generator_loss(const LossReport& r, const TrainingConfig& config) {
  return r.adv_g + config.lambda_fm * r.fm + config.lambda_mel * r.mel + config.kl_weight * r.kl + r.variance;
}

}  // namespace etts
