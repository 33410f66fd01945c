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
#include <utility>
#include <vector>

#include "etts/config.hpp"
#include "etts/wav.hpp"

namespace etts {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major

  Image() = default;
  Image(int w, int h, Rgb fill = {255, 255, 255});
  Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

void write_png(const Image& image, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

/// Curve colour for system index i; index 0 is the reference.
Rgb series_color(std::size_t i);

struct PlotFiles {
  std::filesystem::path pitch;
  std::filesystem::path spectrogram;
  int curves = 0;
};

using NamedWaveform = std::pair<std::string, Waveform>;

/// Writes {utt_id}_pitch.png (reference and every system overlaid) and
/// {utt_id}_spec.png (one log-mel panel per waveform, reference on top).
PlotFiles plot_outputs(const std::string& utt_id, const Waveform& reference, const std::vector<NamedWaveform>& systems,
                       const AudioConfig& config, const std::filesystem::path& out_dir);

}  // namespace etts
