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

namespace etts::dsp {

/// Magnitude STFT, frequency-major: [fft_size / 2 + 1, frames].
struct LinearSpectrogram {
  torch::Tensor magnitude;
  long frames() const { return magnitude.size(-1); }
  long bins() const { return magnitude.size(-2); }
};

/// Natural-log mel magnitudes, [mel_bins, frames], floored at log(1e-5).
struct MelSpectrogram {
  torch::Tensor log_mel;
  long frames() const { return log_mel.size(-1); }
};

/// Per-frame fundamental frequency in Hz; 0 marks an unvoiced frame.
struct PitchTrack {
  std::vector<double> f0;
  std::size_t size() const { return f0.size(); }
  bool voiced(std::size_t i) const { return f0[i] > 0.0; }
};

/// Per-phoneme pitch targets: mean voiced F0 and voiced max - min.
/// Both are 0 for phonemes without a voiced frame.
struct PhonemePitchTargets {
  std::vector<double> mean_f0;
  std::vector<double> f0_range;
};

inline constexpr double kLogFloor = 1e-5;

/// Frames produced for `samples` samples: floor(samples / hop) + 1.
long frame_count(long samples, const AudioConfig& config);

/// Centred magnitude STFT with a periodic Hann window, batched over leading
/// dimensions: [..., T] -> [..., fft / 2 + 1, floor(T / hop) + 1].
/// Edges are reflect-padded when the signal is long enough, zero-padded
/// otherwise. Differentiable.
torch::Tensor stft_magnitude(const torch::Tensor& waveform, int fft_size, int hop_size, int win_size);

/// Slaney-style mel filterbank, [mel_bins, fft_size / 2 + 1].
torch::Tensor mel_filterbank(const AudioConfig& config);

/// log(max(filterbank @ linear, 1e-5)) over [..., bins, frames]. Differentiable.
torch::Tensor log_mel(const torch::Tensor& linear, const torch::Tensor& filterbank);

LinearSpectrogram compute_linear_spectrogram(std::span<const float> waveform, const AudioConfig& config);
MelSpectrogram compute_mel_spectrogram(const LinearSpectrogram& linear, const AudioConfig& config);

/// Normalised-autocorrelation pitch tracker on the STFT frame grid.
/// Each frame analyses win_size samples centred on frame * hop (zeros outside
/// the signal); the smallest-lag correlation peak within 10% of the best one
/// is refined by parabolic interpolation and accepted when its clarity
/// reaches voicing_threshold.
PitchTrack extract_f0(std::span<const float> waveform, const AudioConfig& config);

PhonemePitchTargets phoneme_level_targets(const PitchTrack& pitch, std::span<const int> durations);

}  // namespace etts::dsp
