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

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "etts/config.hpp"
#include "etts/corpus.hpp"
#include "etts/discriminators.hpp"
#include "etts/losses.hpp"
#include "etts/posterior_encoder.hpp"
#include "etts/synthesizer.hpp"
#include "etts/variance_adaptor.hpp"

namespace etts {

/// An utterance with every training feature precomputed.
struct PreparedUtterance {
  UtteranceRecord record;
  torch::Tensor audio;   // [frames * hop], zero-padded past the file end
  torch::Tensor linear;  // [1, bins, frames]
  VarianceTargets targets;
};

std::vector<PreparedUtterance> prepare_corpus(const CorpusManifest& manifest, const Config& config);

/// Sample window matching a latent segment: [start_frame * hop, +frames * hop).
struct SampleWindow {
  long start = 0;
  long length = 0;
};
SampleWindow segment_window(long start_frame, long frames, int hop);

struct ParameterGroup {
  std::string name;
  std::vector<torch::Tensor> parameters;
};

/// Owns every network, both optimizers and the step counter.
class Trainer {
 public:
  Trainer(const Config& config, std::vector<PreparedUtterance> corpus);

  /// One optimisation step: discriminator update on the detached fake, then
  /// generator-side update on adversarial, feature matching, mel, KL and
  /// variance losses. Throws NonFiniteLoss naming the first bad term.
  LossReport train_step();

  long step() const { return step_; }
  const Config& config() const { return config_; }

  void save_checkpoint(const std::filesystem::path& path) const;
  /// Restores parameters, optimizer state and step. Throws if the stored
  /// config hash differs from this trainer's.
  void load_checkpoint(const std::filesystem::path& path);

  /// Named groups used for update-coverage checks: style table, phoneme
  /// encoder, frame encoder (with SAIN), prior projection, variance heads,
  /// flow, posterior encoder, decoder, then each sub-discriminator.
  std::vector<ParameterGroup> parameter_groups() const;

  /// Called with "discriminator" after the D update and "generator" after
  /// the G update of every step.
  void set_phase_hook(std::function<void(const std::string&)> hook) { phase_hook_ = std::move(hook); }

  SynthesizerNetwork& synthesizer() { return synthesizer_; }
  PosteriorEncoder& posterior() { return posterior_; }
  DiscriminatorSet& discriminators() { return discriminators_; }
  const std::vector<PreparedUtterance>& corpus() const { return corpus_; }

 private:
  void set_learning_rate();

  Config config_;
  std::vector<PreparedUtterance> corpus_;
  SynthesizerNetwork synthesizer_{nullptr};
  PosteriorEncoder posterior_{nullptr};
  DiscriminatorSet discriminators_{nullptr};
  std::unique_ptr<torch::optim::Adam> optimizer_g_;
  std::unique_ptr<torch::optim::Adam> optimizer_d_;
  MelLoss mel_loss_;
  long step_ = 0;
  std::function<void(const std::string&)> phase_hook_;
};

struct TrainOptions {
  std::filesystem::path out_dir;
  std::filesystem::path resume_from;  // empty: start fresh
  std::function<void(const LossReport&)> on_step;
};

/// Runs until config.training.total_steps, appending one JSON line per step
/// to <out_dir>/losses.jsonl and writing <out_dir>/ckpt_<step>.pt every
/// checkpoint_interval steps plus <out_dir>/latest.pt at the end.
/// Returns the path of the final checkpoint.
std::filesystem::path train(const Config& config, const CorpusManifest& manifest, const TrainOptions& options);

}  // namespace etts
