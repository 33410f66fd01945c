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

#include <gtest/gtest.h>
#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

#include "etts/corpus.hpp"
#include "etts/error.hpp"
#include "etts/features.hpp"
#include "etts/wav.hpp"
#include "test_util.hpp"

namespace etts {
namespace {

using dsp::PitchTrack;

Waveform sine(double hz, long n, double amp = 0.5, int sr = 22050) {
  Waveform w(n);
  for (long i = 0; i < n; ++i) w[i] = static_cast<float>(amp * std::sin(2 * std::numbers::pi * hz * i / sr));
  return w;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Stft, FrameCountConvention) {
  AudioConfig cfg;
  for (long k : {1L, 4L, 37L}) {
    Waveform w(cfg.hop_size * k, 0.1f);
    EXPECT_EQ(dsp::compute_linear_spectrogram(w, cfg).frames(), k + 1);
  }
}

TEST(Stft, ZeroInputGivesZeroSpectrogram) {
  AudioConfig cfg;
  Waveform w(5000, 0.0f);
  auto spec = dsp::compute_linear_spectrogram(w, cfg);
  EXPECT_EQ(spec.bins(), cfg.linear_bins());
  EXPECT_EQ(spec.magnitude.abs().max().item<float>(), 0.0f);
}

TEST(Stft, MatchesDirectDft) {
  AudioConfig cfg;
  std::mt19937 rng(3);
  std::normal_distribution<float> nd;
  Waveform w(4000);
  for (auto& x : w) x = nd(rng);
  auto spec = dsp::compute_linear_spectrogram(w, cfg).magnitude.to(torch::kFloat64);

  // Frame 5 lies fully inside the signal: no padding involved.
  const int n = cfg.fft_size, frame = 5;
  const long start = frame * cfg.hop_size - n / 2;
  for (int k : {0, 1, 17, 100, 511, 512}) {
    std::complex<double> acc = 0;
    for (int i = 0; i < n; ++i) {
      const double hann = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / n);
      acc += hann * w[start + i] * std::polar(1.0, -2 * std::numbers::pi * k * i / n);
    }
    EXPECT_NEAR(spec[k][frame].item<double>(), std::abs(acc), 1e-3 * (1 + std::abs(acc))) << "bin " << k;
  }
}

TEST(Stft, BinCenteredSineHasSingleDominantBin) {
  AudioConfig cfg;
  const int bin = 40;
  const double hz = bin * static_cast<double>(cfg.sample_rate) / cfg.fft_size;
  auto spec = dsp::compute_linear_spectrogram(sine(hz, 22050), cfg).magnitude;
  auto argmax = spec.narrow(1, 4, spec.size(1) - 8).argmax(0);
  EXPECT_TRUE((argmax == bin).all().item<bool>());
}

TEST(Mel, FilterbankOracle) {
  AudioConfig cfg;
  auto fb = dsp::mel_filterbank(cfg).to(torch::kFloat64);
  ASSERT_EQ(fb.size(0), cfg.mel_bins);
  ASSERT_EQ(fb.size(1), cfg.linear_bins());
  // Slaney scale: linear below 1 kHz at 200/3 Hz per mel, log above.
  auto hz2mel = [](double f) { return f < 1000 ? f * 3 / 200 : 15 + 27 * std::log(f / 1000) / std::log(6.4); };
  auto mel2hz = [](double m) { return m < 15 ? m * 200 / 3 : 1000 * std::exp((m - 15) * std::log(6.4) / 27); };
  const double m_lo = hz2mel(cfg.fmin), m_hi = hz2mel(cfg.fmax);
  for (int b : {0, 10, 45, 79}) {
    const double f_l = mel2hz(m_lo + (m_hi - m_lo) * b / (cfg.mel_bins + 1));
    const double f_c = mel2hz(m_lo + (m_hi - m_lo) * (b + 1) / (cfg.mel_bins + 1));
    const double f_r = mel2hz(m_lo + (m_hi - m_lo) * (b + 2) / (cfg.mel_bins + 1));
    const double norm = 2.0 / (f_r - f_l);
    for (int k = 0; k < cfg.linear_bins(); ++k) {
      const double f = k * static_cast<double>(cfg.sample_rate) / cfg.fft_size;
      const double tri = std::max(0.0, std::min((f - f_l) / (f_c - f_l), (f_r - f) / (f_r - f_c)));
      EXPECT_NEAR(fb[b][k].item<double>(), norm * tri, 1e-6) << "band " << b << " bin " << k;
    }
  }
}

TEST(Mel, ZeroInputGivesUniformFloor) {
  AudioConfig cfg;
  dsp::LinearSpectrogram lin{torch::zeros({cfg.linear_bins(), 7})};
  auto mel = dsp::compute_mel_spectrogram(lin, cfg).log_mel;
  EXPECT_TRUE(torch::allclose(mel, torch::full_like(mel, std::log(dsp::kLogFloor))));
}

TEST(Mel, DoublingMagnitudeAddsLog2) {
  AudioConfig cfg;
  auto lin = dsp::compute_linear_spectrogram(sine(440, 8000), cfg);
  auto a = dsp::compute_mel_spectrogram(lin, cfg).log_mel;
  auto b = dsp::compute_mel_spectrogram({lin.magnitude * 2}, cfg).log_mel;
  auto above = a > std::log(dsp::kLogFloor) + 1.0;
  ASSERT_GT(above.sum().item<long>(), 100);
  auto diff = (b - a).masked_select(above);
  EXPECT_NEAR(diff.min().item<double>(), std::log(2.0), 1e-4);
  EXPECT_NEAR(diff.max().item<double>(), std::log(2.0), 1e-4);
}

TEST(Mel, SinePeaksInItsBand) {
  AudioConfig cfg;
  const double hz = 1500.0;
  auto lin = dsp::compute_linear_spectrogram(sine(hz, 22050), cfg);
  auto mel = dsp::compute_mel_spectrogram(lin, cfg).log_mel;
  auto fb = dsp::mel_filterbank(cfg);
  const long k = std::lround(hz * cfg.fft_size / cfg.sample_rate);
  const long expected = fb.select(1, k).argmax().item<long>();
  EXPECT_LE(std::abs(mel.select(1, 20).argmax().item<long>() - expected), 1);
}

TEST(Mel, RejectsWrongBinCount) {
  AudioConfig cfg;
  dsp::LinearSpectrogram lin{torch::zeros({100, 3})};
  EXPECT_THROW(dsp::compute_mel_spectrogram(lin, cfg), InvalidArgument);
}

TEST(F0, PureSine220) {
  AudioConfig cfg;
  auto track = dsp::extract_f0(sine(220, 22050), cfg);
  std::vector<double> voiced;
  for (std::size_t i = 0; i < track.size(); ++i)
    if (track.voiced(i)) voiced.push_back(track.f0[i]);
  ASSERT_GT(voiced.size(), track.size() * 8 / 10);
  std::nth_element(voiced.begin(), voiced.begin() + voiced.size() / 2, voiced.end());
  EXPECT_NEAR(voiced[voiced.size() / 2], 220.0, 3.0);
}

TEST(F0, SilenceIsUnvoiced) {
  AudioConfig cfg;
  auto track = dsp::extract_f0(Waveform(10000, 0.0f), cfg);
  for (double f : track.f0) EXPECT_EQ(f, 0.0);
}

TEST(F0, LowNoiseMostlyUnvoiced) {
  AudioConfig cfg;
  std::mt19937 rng(11);
  std::normal_distribution<float> nd(0.0f, 0.01f);
  Waveform w(22050);
  for (auto& x : w) x = nd(rng);
  auto track = dsp::extract_f0(w, cfg);
  long unvoiced = 0;
  for (std::size_t i = 0; i < track.size(); ++i) unvoiced += !track.voiced(i);
  EXPECT_GE(unvoiced, static_cast<long>(0.9 * track.size()));
}

TEST(F0, VoicedValuesWithinRange) {
  AudioConfig cfg;
  const auto& manifest = testing::shared_corpus();
  auto track = dsp::extract_f0(manifest.load_audio(manifest.records[0], cfg), cfg);
  for (double f : track.f0)
    if (f > 0) {
      EXPECT_GE(f, cfg.f0_min);
      EXPECT_LE(f, cfg.f0_max);
    }
}

TEST(PhonemeTargets, Conventions) {
  PitchTrack p{{200, 200, 200, 0, 0, 180, 0, 220}};
  auto t = dsp::phoneme_level_targets(p, std::vector<int>{3, 2, 3});
  ASSERT_EQ(t.mean_f0.size(), 3u);
  EXPECT_DOUBLE_EQ(t.mean_f0[0], 200);
  EXPECT_DOUBLE_EQ(t.f0_range[0], 0);
  EXPECT_DOUBLE_EQ(t.mean_f0[1], 0);
  EXPECT_DOUBLE_EQ(t.f0_range[1], 0);
  EXPECT_DOUBLE_EQ(t.mean_f0[2], 200);
  EXPECT_DOUBLE_EQ(t.f0_range[2], 40);
}

TEST(PhonemeTargets, LengthMismatchThrows) {
  PitchTrack p{{100, 100, 100}};
  EXPECT_THROW(dsp::phoneme_level_targets(p, std::vector<int>{1, 1}), InvalidArgument);
  EXPECT_THROW(dsp::phoneme_level_targets(p, std::vector<int>{3, 0}), InvalidArgument);
}

TEST(Wav, RoundTripAndClipping) {
  auto dir = testing::temp_dir("wav");
  Waveform w{0.0f, 0.5f, -0.25f, 2.0f, -2.0f};
  write_wav(dir / "a.wav", w, 16000);
  auto back = read_wav(dir / "a.wav");
  EXPECT_EQ(back.sample_rate, 16000);
  ASSERT_EQ(back.samples.size(), w.size());
  EXPECT_NEAR(back.samples[1], 0.5f, 1e-4);
  EXPECT_NEAR(back.samples[2], -0.25f, 1e-4);
  EXPECT_NEAR(back.samples[3], 0.999f, 1e-4);
  EXPECT_NEAR(back.samples[4], -0.999f, 1e-4);
  EXPECT_THROW(read_wav(dir / "missing.wav"), IoError);
}

TEST(Corpus, DurationsMatchFrameCounts) {
  AudioConfig cfg;
  CorpusOptions opts;
  opts.n_styles = 2;
  auto dir = testing::temp_dir("corpus2");
  auto m = generate_synthetic_corpus(opts, cfg, dir);
  ASSERT_EQ(m.records.size(), 8u);
  for (const auto& r : m.records) {
    EXPECT_EQ(r.durations.size(), r.phoneme_ids.size());
    EXPECT_LT(r.style_id, 2);
    EXPECT_EQ(dsp::frame_count(static_cast<long>(m.load_audio(r, cfg).size()), cfg), r.total_frames());
  }
  EXPECT_NO_THROW(m.validate(cfg, opts.n_phonemes, 2));
  auto loaded = CorpusManifest::load(dir / "manifest.tsv");
  ASSERT_EQ(loaded.records.size(), m.records.size());
  EXPECT_EQ(loaded.records[3].durations, m.records[3].durations);
  EXPECT_EQ(loaded.records[3].phoneme_ids, m.records[3].phoneme_ids);
}

TEST(Corpus, SameSeedIsByteIdentical) {
  AudioConfig cfg;
  CorpusOptions opts;
  auto a = testing::temp_dir("corpus_a"), b = testing::temp_dir("corpus_b");
  auto ma = generate_synthetic_corpus(opts, cfg, a);
  generate_synthetic_corpus(opts, cfg, b);
  for (const auto& r : ma.records) EXPECT_EQ(slurp(a / r.audio_path), slurp(b / r.audio_path));
  EXPECT_EQ(slurp(a / "manifest.tsv"), slurp(b / "manifest.tsv"));
}

TEST(Corpus, StylesHaveDistinctPitch) {
  AudioConfig cfg;
  const auto& m = testing::shared_corpus();
  std::vector<double> mean_by_style(4, 0.0), count(4, 0.0);
  for (const auto& r : m.records) {
    auto t = dsp::extract_f0(m.load_audio(r, cfg), cfg);
    for (double f : t.f0)
      if (f > 0) {
        mean_by_style[r.style_id] += f;
        count[r.style_id] += 1;
      }
  }
  for (int s = 0; s < 4; ++s)
    if (count[s] > 0) mean_by_style[s] /= count[s];
  for (int s = 1; s < 4; ++s)
    if (count[s] > 0 && count[s - 1] > 0) {
      EXPECT_GT(mean_by_style[s], mean_by_style[s - 1] + 20);
    }
}

TEST(Corpus, Preconditions) {
  AudioConfig cfg;
  CorpusOptions opts;
  opts.n_styles = 1;
  EXPECT_THROW(generate_synthetic_corpus(opts, cfg, testing::temp_dir("bad1")), InvalidArgument);
  opts.n_styles = 2;
  opts.n_utterances = 4;
  EXPECT_THROW(generate_synthetic_corpus(opts, cfg, testing::temp_dir("bad2")), InvalidArgument);
  opts.n_utterances = 8;
  EXPECT_THROW(generate_synthetic_corpus(opts, cfg, "/proc/etts_unwritable"), IoError);
}

TEST(Corpus, ValidateCatchesDurationMismatch) {
  AudioConfig cfg;
  auto m = testing::shared_corpus();
  m.records[0].durations.back() += 1;
  EXPECT_THROW(m.validate(cfg, 32, 4), InvalidArgument);
}

}  // namespace
}  // namespace etts
