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

#include "etts/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "etts/error.hpp"

namespace etts::dsp {
namespace {

double hz_to_mel(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  return hz >= min_log_hz ? min_log_mel + std::log(hz / min_log_hz) / logstep : hz / f_sp;
}

double mel_to_hz(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  return mel >= min_log_mel ? min_log_hz * std::exp(logstep * (mel - min_log_mel)) : f_sp * mel;
}

}  // namespace

long frame_count(long samples, const AudioConfig& config) { return samples / config.hop_size + 1; }

torch::Tensor stft_magnitude(const torch::Tensor& waveform, int fft_size, int hop_size, int win_size) {
  ETTS_CHECK(waveform.dim() >= 1 && waveform.size(-1) > 0, "stft: empty waveform");
  ETTS_CHECK(fft_size >= win_size, "stft: fft_size must be >= win_size");
  const auto length = waveform.size(-1);
  auto lead = waveform.sizes().vec();
  lead.pop_back();
  auto flat = waveform.reshape({-1, 1, length});

  const long pad = fft_size / 2;
  namespace F = torch::nn::functional;
  auto options = F::PadFuncOptions({pad, pad});
  if (length > pad)
    options.mode(torch::kReflect);
  else
    options.mode(torch::kConstant);
  auto padded = F::pad(flat, options).squeeze(1);

  auto window = torch::hann_window(win_size, torch::TensorOptions().dtype(waveform.dtype()));
  auto spec = torch::stft(padded, fft_size, hop_size, win_size, window,
                          /*normalized=*/false, /*onesided=*/true, /*return_complex=*/true);
  auto mag = torch::abs(spec);
  lead.push_back(mag.size(-2));
  lead.push_back(mag.size(-1));
  return mag.reshape(lead);
}

torch::Tensor mel_filterbank(const AudioConfig& config) {
  const int bins = config.linear_bins();
  const int n_mels = config.mel_bins;
  const double mel_lo = hz_to_mel(config.fmin);
  const double mel_hi = hz_to_mel(config.fmax);
  std::vector<double> hz(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));

  auto fb = torch::zeros({n_mels, bins}, torch::kFloat64);
  auto acc = fb.accessor<double, 2>();
  for (int m = 0; m < n_mels; ++m) {
    const double enorm = 2.0 / (hz[m + 2] - hz[m]);
    for (int b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * config.sample_rate / config.fft_size;
      const double lower = (f - hz[m]) / (hz[m + 1] - hz[m]);
      const double upper = (hz[m + 2] - f) / (hz[m + 2] - hz[m + 1]);
      acc[m][b] = std::max(0.0, std::min(lower, upper)) * enorm;
    }
  }
  return fb.to(torch::kFloat32);
}

torch::Tensor log_mel(const torch::Tensor& linear, const torch::Tensor& filterbank) {
  ETTS_CHECK(linear.size(-2) == filterbank.size(1), "log_mel: linear bin count does not match the filterbank");
  auto mel = torch::matmul(filterbank.to(linear.dtype()), linear);
  return torch::log(torch::clamp_min(mel, kLogFloor));
}

LinearSpectrogram compute_linear_spectrogram(std::span<const float> waveform, const AudioConfig& config) {
  ETTS_CHECK(!waveform.empty(), "compute_linear_spectrogram: empty waveform");
  auto wav = torch::from_blob(const_cast<float*>(waveform.data()), {static_cast<long>(waveform.size())},
                              torch::kFloat32)
                 .clone();
  torch::NoGradGuard no_grad;
  return {stft_magnitude(wav, config.fft_size, config.hop_size, config.win_size)};
}

MelSpectrogram compute_mel_spectrogram(const LinearSpectrogram& linear, const AudioConfig& config) {
  ETTS_CHECK(linear.magnitude.dim() == 2, "compute_mel_spectrogram: expected [bins, frames]");
  ETTS_CHECK(linear.bins() == config.linear_bins(),
             "compute_mel_spectrogram: spectrogram has " + std::to_string(linear.bins()) +
                 " bins, config expects " + std::to_string(config.linear_bins()));
  torch::NoGradGuard no_grad;
  return {log_mel(linear.magnitude, mel_filterbank(config))};
}

PitchTrack extract_f0(std::span<const float> waveform, const AudioConfig& config) {
  ETTS_CHECK(!waveform.empty(), "extract_f0: empty waveform");
  const long n = static_cast<long>(waveform.size());
  const long frames = frame_count(n, config);
  const int window = config.win_size;
  const int lag_min = static_cast<int>(std::floor(config.sample_rate / config.f0_max));
  const int lag_max = static_cast<int>(std::ceil(config.sample_rate / config.f0_min));
  ETTS_CHECK(lag_max + 2 < window, "extract_f0: win_size too short for f0_min");
  const int span = window - lag_max - 1;

  PitchTrack track;
  track.f0.assign(frames, 0.0);
  std::vector<double> buf(window);
  std::vector<double> r(lag_max + 2, 0.0);
  // Squared-sum prefix over the frame, so every lagged energy is O(1).
  std::vector<double> prefix(window + 1);

  for (long t = 0; t < frames; ++t) {
    const long start = t * config.hop_size - window / 2;
    for (int i = 0; i < window; ++i) {
      const long idx = start + i;
      buf[i] = (idx >= 0 && idx < n) ? waveform[idx] : 0.0;
    }
    prefix[0] = 0.0;
    for (int i = 0; i < window; ++i) prefix[i + 1] = prefix[i] + buf[i] * buf[i];
    const double e0 = prefix[span];
    if (e0 < 1e-10 * span) continue;

    for (int lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      double acc = 0.0;
      for (int i = 0; i < span; ++i) acc += buf[i] * buf[i + lag];
      const double el = prefix[lag + span] - prefix[lag];
      r[lag] = el > 0.0 ? acc / std::sqrt(e0 * el) : 0.0;
    }

    double best = -1.0;
    for (int lag = lag_min; lag <= lag_max; ++lag) best = std::max(best, r[lag]);
    if (best < config.voicing_threshold) continue;

    int chosen = -1;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      if (r[lag] >= 0.9 * best && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
        chosen = lag;
        break;
      }
    }
    if (chosen < 0) continue;

    const double a = r[chosen - 1], b = r[chosen], c = r[chosen + 1];
    const double denom = a - 2.0 * b + c;
    const double delta = std::abs(denom) > 1e-12 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
    const double f0 = config.sample_rate / (chosen + delta);
    if (f0 >= config.f0_min && f0 <= config.f0_max) track.f0[t] = f0;
  }
  return track;
}

PhonemePitchTargets phoneme_level_targets(const PitchTrack& pitch, std::span<const int> durations) {
  long total = 0;
  for (int d : durations) {
    ETTS_CHECK(d > 0, "phoneme_level_targets: durations must be positive");
    total += d;
  }
  ETTS_CHECK(total == static_cast<long>(pitch.size()),
             "phoneme_level_targets: durations sum to " + std::to_string(total) + " but pitch has " +
                 std::to_string(pitch.size()) + " frames");
  PhonemePitchTargets out;
  std::size_t pos = 0;
  for (int d : durations) {
    double sum = 0.0, lo = 0.0, hi = 0.0;
    int voiced = 0;
    for (int i = 0; i < d; ++i, ++pos) {
      if (!pitch.voiced(pos)) continue;
      const double f = pitch.f0[pos];
      lo = voiced ? std::min(lo, f) : f;
      hi = voiced ? std::max(hi, f) : f;
      sum += f;
      ++voiced;
    }
    out.mean_f0.push_back(voiced ? sum / voiced : 0.0);
    out.f0_range.push_back(voiced ? hi - lo : 0.0);
  }
  return out;
}

}  // namespace etts::dsp
