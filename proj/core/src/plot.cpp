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

#include "etts/plot.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

#include "etts/error.hpp"
#include "etts/features.hpp"

namespace etts {
namespace {

constexpr int kMargin = 40;
constexpr int kPitchWidth = 900;
constexpr int kPitchHeight = 360;
constexpr int kPanelWidth = 800;
constexpr int kPanelGap = 6;

void plot_point(Image& img, int x, int y, Rgb c) {
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int px = x + dx, py = y + dy;
      if (px >= 0 && py >= 0 && px < img.width && py < img.height) img.at(px, py) = c;
    }
}

void plot_line(Image& img, int x0, int y0, int x1, int y1, Rgb c) {
  const int steps = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1});
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    plot_point(img, static_cast<int>(std::lround(x0 + t * (x1 - x0))), static_cast<int>(std::lround(y0 + t * (y1 - y0))),
               c);
  }
}

Rgb colormap(double v) {
  static constexpr std::array<std::array<double, 3>, 5> stops{
      {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  v = std::clamp(v, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(v), stops.size() - 2);
  const double f = v - static_cast<double>(i);
  auto mix = [&](int ch) { return static_cast<std::uint8_t>(std::lround(stops[i][ch] * (1 - f) + stops[i + 1][ch] * f)); };
  return {mix(0), mix(1), mix(2)};
}

}  // namespace

Image::Image(int w, int h, Rgb fill) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
  ETTS_CHECK(w > 0 && h > 0, "image dimensions must be positive");
}

void write_png(const Image& image, const std::filesystem::path& path) {
  png_image out;
  std::memset(&out, 0, sizeof(out));
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(image.width);
  out.height = static_cast<png_uint_32>(image.height);
  out.format = PNG_FORMAT_RGB;
  static_assert(sizeof(Rgb) == 3);
  if (!png_image_write_to_file(&out, path.string().c_str(), 0, image.pixels.data(), 0, nullptr))
    throw IoError("cannot write " + path.string() + ": " + out.message);
}

Image read_png(const std::filesystem::path& path) {
  png_image in;
  std::memset(&in, 0, sizeof(in));
  in.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&in, path.string().c_str()))
    throw IoError("cannot read " + path.string() + ": " + in.message);
  in.format = PNG_FORMAT_RGB;
  Image img(static_cast<int>(in.width), static_cast<int>(in.height));
  if (!png_image_finish_read(&in, nullptr, img.pixels.data(), 0, nullptr)) {
    png_image_free(&in);
    throw IoError("cannot decode " + path.string() + ": " + in.message);
  }
  return img;
}

Rgb series_color(std::size_t i) {
  static constexpr std::array<Rgb, 6> palette{
      {{0, 0, 0}, {214, 39, 40}, {31, 119, 180}, {44, 160, 44}, {255, 127, 14}, {148, 103, 189}}};
  return palette[i % palette.size()];
}

PlotFiles plot_outputs(const std::string& utt_id, const Waveform& reference, const std::vector<NamedWaveform>& systems,
                       const AudioConfig& config, const std::filesystem::path& out_dir) {
  ETTS_CHECK(!systems.empty(), "plot_outputs: no systems to plot");
  std::vector<const Waveform*> waves{&reference};
  for (const auto& [name, wav] : systems) waves.push_back(&wav);

  std::vector<dsp::PitchTrack> tracks;
  std::vector<torch::Tensor> mels;
  for (const auto* w : waves) {
    tracks.push_back(dsp::extract_f0(*w, config));
    mels.push_back(dsp::compute_mel_spectrogram(dsp::compute_linear_spectrogram(*w, config), config).log_mel);
  }
  std::size_t frames = 1;
  double f0_top = 1.0;
  for (const auto& t : tracks) {
    frames = std::max(frames, t.size());
    for (double f : t.f0) f0_top = std::max(f0_top, f);
  }
  f0_top *= 1.1;

  std::filesystem::create_directories(out_dir);
  PlotFiles files;
  files.pitch = out_dir / (utt_id + "_pitch.png");
  files.spectrogram = out_dir / (utt_id + "_spec.png");

  Image pitch(kPitchWidth, kPitchHeight);
  const int x0 = kMargin, y0 = kPitchHeight - kMargin, plot_w = kPitchWidth - 2 * kMargin,
            plot_h = kPitchHeight - 2 * kMargin;
  plot_line(pitch, x0, y0, x0 + plot_w, y0, {128, 128, 128});
  plot_line(pitch, x0, y0, x0, y0 - plot_h, {128, 128, 128});
  auto px = [&](std::size_t i) { return x0 + static_cast<int>(plot_w * static_cast<double>(i) / frames); };
  auto py = [&](double f) { return y0 - static_cast<int>(plot_h * f / f0_top); };
  for (std::size_t s = 0; s < tracks.size(); ++s) {
    const auto& t = tracks[s];
    const Rgb c = series_color(s);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t.voiced(i)) continue;
      if (i + 1 < t.size() && t.voiced(i + 1))
        plot_line(pitch, px(i), py(t.f0[i]), px(i + 1), py(t.f0[i + 1]), c);
      else
        plot_point(pitch, px(i), py(t.f0[i]), c);
    }
    ++files.curves;
  }
  write_png(pitch, files.pitch);

  double hi = -1e30;
  for (const auto& m : mels) hi = std::max(hi, m.max().item<double>());
  const double lo = hi - 8.0;
  const int bins = config.mel_bins, panel_h = 2 * bins;
  const int n = static_cast<int>(mels.size());
  Image spec(kPanelWidth, n * panel_h + (n - 1) * kPanelGap);
  for (int p = 0; p < n; ++p) {
    auto m = mels[p].to(torch::kFloat64).contiguous();
    const long f = m.size(1);
    auto acc = m.accessor<double, 2>();
    for (int y = 0; y < panel_h; ++y) {
      const int bin = bins - 1 - y / 2;
      for (int x = 0; x < kPanelWidth; ++x) {
        const long fr = static_cast<long>(static_cast<double>(x) * static_cast<double>(frames) / kPanelWidth);
        const Rgb c = fr < f ? colormap((acc[bin][fr] - lo) / (hi - lo)) : Rgb{255, 255, 255};
        spec.at(x, p * (panel_h + kPanelGap) + y) = c;
      }
    }
  }
  write_png(spec, files.spectrogram);
  return files;
}

}  // namespace etts
