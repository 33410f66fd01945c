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

#include <filesystem>
#include <span>
#include <vector>

namespace etts {

using Waveform = std::vector<float>;

struct WavData {
  int sample_rate = 0;
  Waveform samples;  // mono, nominally in [-1, 1]
};

/// Reads a mono 16-bit PCM RIFF/WAVE file.
WavData read_wav(const std::filesystem::path& path);

/// Writes mono 16-bit PCM. Samples are clipped to +-0.999 before
/// quantisation.
void write_wav(const std::filesystem::path& path, std::span<const float> samples, int sample_rate);

}  // namespace etts
