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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace etts {

/// Fixed STFT / mel / pitch analysis settings shared by training and
/// evaluation. Frames are centred on multiples of hop_size, so a signal of
/// N samples has floor(N / hop_size) + 1 frames.
struct AudioConfig {
  int sample_rate = 22050;
  int fft_size = 1024;
  int win_size = 1024;
  int hop_size = 256;
  int mel_bins = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double f0_min = 60.0;
  double f0_max = 500.0;
  double voicing_threshold = 0.3;

  int linear_bins() const { return fft_size / 2 + 1; }
  void validate() const;
};

struct EncoderConfig {
  int n_phonemes = 32;
  int n_styles = 4;
  int d_model = 192;
  int d_style = 64;
  int n_heads = 2;
  int phoneme_blocks = 4;
  int frame_blocks = 4;
  int conv_kernel = 5;
  int pitch_bins = 64;  // plus one extra bin reserved for unvoiced
  int range_bins = 32;
  double pitch_min_hz = 60.0;
  double pitch_max_hz = 500.0;
  double range_max_hz = 200.0;
};

struct VarianceConfig {
  int filter_channels = 192;
  int kernel = 3;
  double dropout = 0.1;
  double pitch_scale_hz = 100.0;  // head output unit for pitch and range
};

struct FlowConfig {
  int n_couplings = 4;
  int wavenet_layers = 4;
  int kernel = 5;
  int dilation_rate = 1;
  bool mean_only = true;
  bool condition_on_frames = true;
};

struct PosteriorConfig {
  int hidden = 192;
  int layers = 16;
  int kernel = 5;
  int dilation_rate = 1;
};

struct GeneratorConfig {
  std::vector<int> upsample_rates{8, 8, 2, 2};
  int initial_channels = 256;
  std::vector<int> amp_kernel_sizes{3, 7, 11};
  std::vector<std::vector<int>> amp_dilations{{1, 3, 5}, {1, 3, 5}, {1, 3, 5}};
  double snake_alpha_init = 1.0;
  int lowpass_taps = 12;
  double lowpass_beta = 0.0;  // 0 selects the Kaiser design-formula value

  int total_upsampling() const;
};

struct StftResolution {
  int fft_size;
  int hop_size;
  int win_size;
};

struct DiscriminatorConfig {
  std::vector<int> periods{2, 3, 5, 7, 11};
  std::vector<int> mpd_channels{32, 64, 128, 256, 256};
  std::vector<StftResolution> resolutions{{512, 50, 240}, {1024, 120, 600}, {2048, 240, 1200}};
  int mrd_channels = 32;
};

struct ModelConfig {
  int d_latent = 192;
  EncoderConfig encoder;
  VarianceConfig variance;
  FlowConfig flow;
  PosteriorConfig posterior;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
};

struct TrainingConfig {
  double lambda_fm = 2.0;
  double lambda_mel = 45.0;
  double kl_weight = 1.0;
  double learning_rate = 2e-4;
  double beta1 = 0.8;
  double beta2 = 0.99;
  double adam_eps = 1e-9;
  double lr_decay = 0.999875;
  int batch_size = 2;
  int segment_frames = 32;
  long total_steps = 5000;
  long checkpoint_interval = 1000;
  std::uint64_t seed = 1234;
};

/// Everything needed to build, train and run the model. Serialises to a
/// sectioned key = value text file.
struct Config {
  AudioConfig audio;
  ModelConfig model;
  TrainingConfig training;

  /// Desk-scale defaults.
  static Config defaults();
  /// Reduced widths for CPU overfit runs on the 8-utterance corpus.
  static Config smoke();
  /// Preset by name ("default" or "smoke").
  static Config preset(const std::string& name);

  /// Reads key = value overrides on top of `base`. Unknown keys are errors.
  static Config load(const std::filesystem::path& path, Config base = defaults());
  /// Same, from in-memory text.
  static Config parse(const std::string& text, Config base = defaults());
  /// Applies a single "section.key=value" override.
  void set(const std::string& dotted_key, const std::string& value);

  void save(const std::filesystem::path& path) const;
  std::string to_text() const;
  /// Hash of every field that affects the parameter layout or the training
  /// trajectory (total_steps and checkpoint_interval are excluded so runs can
  /// be extended on resume).
  std::uint64_t hash() const;

  void validate() const;
};

}  // namespace etts
