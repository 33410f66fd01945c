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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "etts/config.hpp"
#include "etts/wav.hpp"

namespace etts {

/// One utterance: phoneme ids, style label, per-phoneme frame durations and
/// the audio file (relative to the manifest directory).
struct UtteranceRecord {
  std::string id;
  int style_id = 0;
  std::vector<int> phoneme_ids;
  std::vector<int> durations;
  std::string audio_path;

  long total_frames() const;
};

/// Tab-separated text, one record per line:
///   id <TAB> style_id <TAB> phoneme ids <TAB> durations <TAB> audio path
/// Lists are space separated. Lines starting with '#' are comments.
struct CorpusManifest {
  std::filesystem::path root;  // directory audio paths are relative to
  std::vector<UtteranceRecord> records;

  static CorpusManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::filesystem::path audio_file(const UtteranceRecord& record) const;
  Waveform load_audio(const UtteranceRecord& record, const AudioConfig& config) const;

  /// Checks id ranges and that sum(durations) equals the spectrogram frame
  /// count of every referenced audio file.
  void validate(const AudioConfig& config, int n_phonemes, int n_styles) const;
};

struct CorpusOptions {
  int n_utterances = 8;
  int n_styles = 4;
  std::uint64_t seed = 7;
  int n_phonemes = 32;
  int min_phonemes = 20;
  int max_phonemes = 60;
  int min_phoneme_frames = 4;
  int max_phoneme_frames = 12;
};

/// Phonemes with id >= this value are noise-excited (unvoiced).
int first_unvoiced_phoneme(int n_phonemes);

/// Renders a deterministic multi-style corpus of harmonic "speech": each
/// phoneme is a segment shaped by its own formant envelope (or filtered
/// noise for unvoiced ids), and each style has its own F0 register, contour
/// slope and spectral tilt. Writes <out_dir>/wavs/*.wav and
/// <out_dir>/manifest.tsv.
CorpusManifest generate_synthetic_corpus(const CorpusOptions& options, const AudioConfig& config,
                                         const std::filesystem::path& out_dir);

}  // namespace etts
