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

#include "etts/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "etts/error.hpp"
#include "etts/features.hpp"

namespace etts {
namespace {

struct PhonemeShape {
  bool voiced = true;
  double f1 = 500.0, b1 = 90.0;
  double f2 = 1500.0, b2 = 130.0;
  double noise_center = 4000.0;
  double intrinsic_pitch = 0.0;  // relative F0 offset
};

struct StyleShape {
  double base_f0;
  double slope;  // relative F0 change from utterance start to end
  double tilt;   // harmonic k has amplitude k^-tilt
};

std::vector<PhonemeShape> phoneme_inventory(int n_phonemes) {
  // Fixed seed: the inventory is shared by every generated corpus.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int unvoiced_from = first_unvoiced_phoneme(n_phonemes);
  std::vector<PhonemeShape> out(n_phonemes);
  for (int p = 0; p < n_phonemes; ++p) {
    auto& s = out[p];
    s.voiced = p < unvoiced_from;
    s.f1 = 300.0 + 600.0 * u(rng);
    s.f2 = 1000.0 + 1600.0 * u(rng);
    s.b1 = 70.0 + 60.0 * u(rng);
    s.b2 = 100.0 + 100.0 * u(rng);
    s.noise_center = 2500.0 + 3500.0 * u(rng);
    s.intrinsic_pitch = -0.08 + 0.16 * u(rng);
  }
  return out;
}

StyleShape style_shape(int style) {
  static constexpr StyleShape kTable[] = {
      {150.0, 0.30, 1.0}, {220.0, -0.25, 0.6}, {300.0, 0.20, 1.4}, {360.0, -0.20, 0.8}};
  if (style < 4) return kTable[style];
  // Extra styles interleave registers between the tabulated ones.
  const auto& a = kTable[style % 4];
  return {a.base_f0 * (style % 2 ? 0.9 : 1.1), -a.slope, a.tilt + 0.2};
}

double formant_gain(const PhonemeShape& p, double f) {
  const double x1 = (f - p.f1) / p.b1;
  const double x2 = (f - p.f2) / p.b2;
  return 1.0 / (1.0 + x1 * x1) + 0.6 / (1.0 + x2 * x2) + 0.03;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) out.push_back(field);
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw IoError("manifest: bad integer '" + tok + "' in " + what);
    }
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i]);
  return out;
}

Waveform render_utterance(const UtteranceRecord& rec, const std::vector<PhonemeShape>& inventory,
                          const AudioConfig& config, std::mt19937_64& rng) {
  const long frames = rec.total_frames();
  const int hop = config.hop_size;
  const double sr = config.sample_rate;
  const StyleShape style = style_shape(rec.style_id);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double wave_phase = 2.0 * std::numbers::pi * u(rng);
  const double wave_cycles = 1.0 + u(rng);

  // Frame-level control tracks.
  std::vector<double> f0(frames), voiced_amp(frames), noise_amp(frames);
  std::vector<int> owner(frames);
  long t = 0;
  for (std::size_t i = 0; i < rec.phoneme_ids.size(); ++i) {
    for (int k = 0; k < rec.durations[i]; ++k, ++t) owner[t] = rec.phoneme_ids[i];
  }
  for (long f = 0; f < frames; ++f) {
    const double pos = frames > 1 ? static_cast<double>(f) / (frames - 1) : 0.0;
    const auto& ph = inventory[owner[f]];
    f0[f] = style.base_f0 * (1.0 + style.slope * (pos - 0.5)) * (1.0 + ph.intrinsic_pitch) *
            (1.0 + 0.05 * std::sin(2.0 * std::numbers::pi * wave_cycles * pos + wave_phase));
    voiced_amp[f] = ph.voiced ? 1.0 : 0.0;
    noise_amp[f] = ph.voiced ? 0.0 : 0.35;
  }
  // Three-frame smoothing removes F0 steps at phoneme boundaries.
  std::vector<double> smooth(f0);
  for (long f = 1; f + 1 < frames; ++f) smooth[f] = (f0[f - 1] + f0[f] + f0[f + 1]) / 3.0;
  f0 = smooth;

  const long n_samples = frames * hop - 1;
  Waveform out(n_samples);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double phase = 0.0;
  double y1 = 0.0, y2 = 0.0;  // noise resonator state
  for (long n = 0; n < n_samples; ++n) {
    const double fpos = static_cast<double>(n) / hop;
    const long f_lo = std::min<long>(static_cast<long>(fpos), frames - 1);
    const long f_hi = std::min<long>(f_lo + 1, frames - 1);
    const double w = fpos - f_lo;
    auto lerp = [w](double a, double b) { return a + w * (b - a); };
    const double f0_n = lerp(f0[f_lo], f0[f_hi]);
    const double va = lerp(voiced_amp[f_lo], voiced_amp[f_hi]);
    const double na = lerp(noise_amp[f_lo], noise_amp[f_hi]);
    const auto& ph_lo = inventory[owner[f_lo]];
    const auto& ph_hi = inventory[owner[f_hi]];

    phase += 2.0 * std::numbers::pi * f0_n / sr;
    if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;

    double voiced = 0.0;
    if (va > 0.0) {
      const int n_harm = std::min(40, static_cast<int>(0.9 * config.fmax / f0_n));
      for (int k = 1; k <= n_harm; ++k) {
        const double fk = k * f0_n;
        const double env = (1.0 - w) * formant_gain(ph_lo, fk) + w * formant_gain(ph_hi, fk);
        voiced += std::pow(static_cast<double>(k), -style.tilt) * env * std::sin(k * phase);
      }
    }

    double noise = 0.0;
    if (na > 0.0) {
      const double center = lerp(ph_lo.noise_center, ph_hi.noise_center);
      const double radius = 0.85;
      const double a1 = 2.0 * radius * std::cos(2.0 * std::numbers::pi * center / sr);
      const double a2 = -radius * radius;
      const double y = gauss(rng) * (1.0 - radius) + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      noise = 4.0 * y;
    } else {
      y1 = y2 = 0.0;
    }
    out[n] = static_cast<float>(0.25 * va * voiced + na * noise);
  }

  const float peak = std::accumulate(out.begin(), out.end(), 0.0f,
                                     [](float m, float s) { return std::max(m, std::abs(s)); });
  if (peak > 0.0f) {
    const float gain = 0.6f / peak;
    for (auto& s : out) s *= gain;
  }
  return out;
}

}  // namespace

long UtteranceRecord::total_frames() const {
  return std::accumulate(durations.begin(), durations.end(), 0L);
}

int first_unvoiced_phoneme(int n_phonemes) { return n_phonemes - std::max(1, n_phonemes * 3 / 16); }

CorpusManifest CorpusManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  CorpusManifest manifest;
  manifest.root = path.parent_path();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_tabs(line);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 5) throw IoError(where + ": expected 5 tab-separated fields");
    UtteranceRecord rec;
    rec.id = fields[0];
    const auto style = parse_int_list(fields[1], where);
    if (style.size() != 1) throw IoError(where + ": bad style id");
    rec.style_id = style[0];
    rec.phoneme_ids = parse_int_list(fields[2], where);
    rec.durations = parse_int_list(fields[3], where);
    rec.audio_path = fields[4];
    if (rec.phoneme_ids.empty() || rec.phoneme_ids.size() != rec.durations.size())
      throw IoError(where + ": phoneme and duration lists must be non-empty and equally long");
    for (int d : rec.durations)
      if (d <= 0) throw IoError(where + ": durations must be positive");
    manifest.records.push_back(std::move(rec));
  }
  return manifest;
}

void CorpusManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "# id\tstyle_id\tphoneme_ids\tdurations\taudio_path\n";
  for (const auto& r : records)
    out << r.id << '\t' << r.style_id << '\t' << join(r.phoneme_ids) << '\t' << join(r.durations) << '\t'
        << r.audio_path << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::filesystem::path CorpusManifest::audio_file(const UtteranceRecord& record) const {
  const std::filesystem::path p(record.audio_path);
  return p.is_absolute() ? p : root / p;
}

Waveform CorpusManifest::load_audio(const UtteranceRecord& record, const AudioConfig& config) const {
  auto wav = read_wav(audio_file(record));
  if (wav.sample_rate != config.sample_rate)
    throw IoError(record.audio_path + ": sample rate " + std::to_string(wav.sample_rate) + " != " +
                  std::to_string(config.sample_rate));
  return std::move(wav.samples);
}

void CorpusManifest::validate(const AudioConfig& config, int n_phonemes, int n_styles) const {
  for (const auto& r : records) {
    ETTS_CHECK(r.style_id >= 0 && r.style_id < n_styles, r.id + ": style id out of range");
    for (int p : r.phoneme_ids) ETTS_CHECK(p >= 0 && p < n_phonemes, r.id + ": phoneme id out of range");
    const auto audio = load_audio(r, config);
    const long frames = dsp::frame_count(static_cast<long>(audio.size()), config);
    ETTS_CHECK(frames == r.total_frames(), r.id + ": durations sum to " + std::to_string(r.total_frames()) +
                                               " but audio has " + std::to_string(frames) + " frames");
  }
}

CorpusManifest generate_synthetic_corpus(const CorpusOptions& options, const AudioConfig& config,
                                         const std::filesystem::path& out_dir) {
  ETTS_CHECK(options.n_styles >= 2, "generate_synthetic_corpus: need at least 2 styles");
  ETTS_CHECK(options.n_utterances >= 8, "generate_synthetic_corpus: need at least 8 utterances");
  ETTS_CHECK(options.n_phonemes >= 2, "generate_synthetic_corpus: need at least 2 phonemes");
  ETTS_CHECK(options.min_phonemes >= 1 && options.max_phonemes >= options.min_phonemes,
             "generate_synthetic_corpus: bad phoneme count range");
  ETTS_CHECK(options.min_phoneme_frames >= 1 && options.max_phoneme_frames >= options.min_phoneme_frames,
             "generate_synthetic_corpus: bad duration range");

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wavs", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "wavs").string() + ": " + ec.message());

  const auto inventory = phoneme_inventory(options.n_phonemes);
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> n_ph(options.min_phonemes, options.max_phonemes);
  std::uniform_int_distribution<int> ph(0, options.n_phonemes - 1);
  std::uniform_int_distribution<int> dur(options.min_phoneme_frames, options.max_phoneme_frames);

  CorpusManifest manifest;
  manifest.root = out_dir;
  for (int u = 0; u < options.n_utterances; ++u) {
    UtteranceRecord rec;
    char id[32];
    std::snprintf(id, sizeof(id), "utt%04d", u);
    rec.id = id;
    rec.style_id = u % options.n_styles;
    const int count = n_ph(rng);
    for (int i = 0; i < count; ++i) {
      rec.phoneme_ids.push_back(ph(rng));
      rec.durations.push_back(dur(rng));
    }
    rec.audio_path = "wavs/" + rec.id + ".wav";
    const auto audio = render_utterance(rec, inventory, config, rng);
    write_wav(out_dir / rec.audio_path, audio, config.sample_rate);
    manifest.records.push_back(std::move(rec));
  }
  manifest.save(out_dir / "manifest.tsv");
  return manifest;
}

}  // namespace etts
