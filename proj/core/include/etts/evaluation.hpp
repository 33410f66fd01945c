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
#include <string>
#include <vector>

#include "etts/config.hpp"
#include "etts/corpus.hpp"
#include "etts/features.hpp"
#include "etts/posterior_encoder.hpp"
#include "etts/synthesizer.hpp"
#include "etts/wav.hpp"

namespace etts {

inline constexpr int kCepstralOrder = 13;
inline constexpr long kMaxFrameMismatch = 2;

/// DCT-II (orthonormal) of each log-mel frame, coefficients 1..n_coeffs.
/// Returns [frames, n_coeffs] in float64.
torch::Tensor mel_cepstrum(const dsp::MelSpectrogram& mel, int n_coeffs = kCepstralOrder);

/// Common frame count of two tracks; throws if they differ by more than
/// kMaxFrameMismatch frames.
long aligned_frames(long a, long b);

/// Mean over frames of (10 / ln 10) * sqrt(2 * sum_d (a_d - b_d)^2).
double mel_cepstral_distortion(const torch::Tensor& cep_a, const torch::Tensor& cep_b);

double mcd(std::span<const float> reference, std::span<const float> synthesized, const AudioConfig& config);

struct F0Metrics {
  std::optional<double> rmse_hz;  // undefined without jointly voiced frames
  std::optional<double> corr;     // undefined as well when either side has zero variance
  double vuv_error_pct = 0.0;

  long frames = 0;
  long joint_voiced = 0;
  long vuv_mismatches = 0;
  double squared_error_sum = 0.0;
};

F0Metrics f0_metrics(const dsp::PitchTrack& reference, const dsp::PitchTrack& synthesized);

struct UtteranceMetrics {
  std::string system;
  std::string utterance;
  bool ok = true;
  std::string error;
  long frames = 0;
  double mcd_db = 0.0;
  F0Metrics f0;
};

struct SystemRow {
  std::string system;
  std::optional<double> mcd_db;
  std::optional<double> bap_db;  // kept for layout parity; never computed
  std::optional<double> f0_rmse_hz;
  std::optional<double> f0_corr;
  std::optional<double> vuv_error_pct;
  int utterances = 0;
  int failures = 0;
};

struct MetricReport {
  std::vector<SystemRow> rows;
  std::vector<UtteranceMetrics> utterances;

  const SystemRow& row(const std::string& system) const;
  std::string to_text() const;
  std::string to_json() const;
};

/// Frame-weighted MCD, pooled RMSE and V/UV, per-utterance mean correlation.
SystemRow aggregate(const std::string& system, const std::vector<UtteranceMetrics>& utterances);

/// Metrics of one (reference, synthesized) waveform pair.
UtteranceMetrics compare_waveforms(std::span<const float> reference, std::span<const float> synthesized,
                                   const AudioConfig& config);

struct EvaluateOptions {
  double noise_scale = 0.667;
  std::uint64_t seed = 0;
  std::vector<std::string> utterance_ids;  // empty: every manifest entry
};

/// Synthesizer plus posterior encoder from one training checkpoint.
class ResynthesisModels {
 public:
  explicit ResynthesisModels(const std::filesystem::path& checkpoint);

  const Config& config() const { return config_; }

  /// Posterior mode of the reference spectrogram, decoded directly.
  Waveform vocoder(const Waveform& reference, int style_id);
  /// Full text-to-speech path with the record's ground-truth durations.
  Waveform tts(const UtteranceRecord& record, double noise_scale, std::uint64_t seed);

 private:
  Config config_;
  SynthesizerNetwork synthesizer_{nullptr};
  PosteriorEncoder posterior_{nullptr};
};

inline const char* const kSystemGroundTruth = "GT";
inline const char* const kSystemVocoder = "GT (vocoder)";
inline const char* const kSystemTts = "TTS";

/// Rows GT, GT (vocoder) and TTS. Synthesis uses ground-truth durations.
/// Writes report.txt and report.json into out_dir when it is non-empty.
MetricReport evaluate_corpus(const CorpusManifest& manifest, const std::filesystem::path& checkpoint,
                             const std::filesystem::path& out_dir, const EvaluateOptions& options = {});

}  // namespace etts
