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

#include <string>
#include <utility>

#include "etts/config.hpp"
#include "etts/discriminators.hpp"
#include "etts/flow.hpp"
#include "etts/gaussian.hpp"

namespace etts {

/// Single-sample Monte Carlo KL: mean over frames and latent channels of
/// log q(z | x) - log p(z | c), with log p from the flowed sample.
torch::Tensor kl_loss(const torch::Tensor& z, const PosteriorStats& posterior, const FlowOutput& flowed,
                      const PriorStats& prior);

/// Same, running the flow on z first.
torch::Tensor kl_loss(const torch::Tensor& z, const PosteriorStats& posterior, FlowStack& flow,
                      const torch::Tensor& c, const torch::Tensor& style, const PriorStats& prior);

struct AdversarialLosses {
  torch::Tensor generator;      // sum_k mean((D_k(fake) - 1)^2)
  torch::Tensor discriminator;  // sum_k mean((D_k(real) - 1)^2) + mean(D_k(fake)^2)
};

/// Least-squares GAN losses. Pass outputs computed on a detached fake when
/// the discriminator term is to be optimised.
AdversarialLosses adversarial_losses(const DiscriminatorOutputs& real, const DiscriminatorOutputs& fake);
torch::Tensor generator_adversarial_loss(const DiscriminatorOutputs& fake);
torch::Tensor discriminator_adversarial_loss(const DiscriminatorOutputs& real, const DiscriminatorOutputs& fake);

/// Sum over sub-discriminators and layers of mean |real - fake|; real
/// features are treated as constants.
torch::Tensor feature_matching_loss(const DiscriminatorOutputs& real, const DiscriminatorOutputs& fake);

/// L1 distance between log-mel spectrograms of two equally long batches
/// [B, T] (or [T]).
class MelLoss {
 public:
  explicit MelLoss(const AudioConfig& config);
  torch::Tensor operator()(const torch::Tensor& fake, const torch::Tensor& real) const;
  torch::Tensor log_mel(const torch::Tensor& waveform) const;

 private:
  AudioConfig config_;
  torch::Tensor filterbank_;
};

/// Per-step scalars.
struct LossReport {
  long step = 0;
  double kl = 0, adv_g = 0, adv_d = 0, fm = 0, mel = 0, variance = 0;
  double total_g = 0, total_d = 0;
  double learning_rate = 0;

  /// One JSON object on a single line.
  std::string to_json() const;
  static LossReport from_json(const std::string& line);
};

/// L_adv_G + lambda_fm L_fm + lambda_mel L_mel + kl_weight L_KL + L_var.
double total_generator_loss(const LossReport& r, const TrainingConfig& config);

}  // namespace etts
