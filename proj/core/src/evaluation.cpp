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

#include "etts/evaluation.hpp"

#include <c10/util/Logging.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "etts/checkpoint_keys.hpp"
#include "etts/error.hpp"
#include "json.hpp"

namespace etts {
namespace {

torch::Tensor dct2_matrix(int n_coeffs, long n) {
  auto k = torch::arange(1, n_coeffs + 1, torch::kFloat64).unsqueeze(1);
  auto i = torch::arange(n, torch::kFloat64).unsqueeze(0);
  return std::sqrt(2.0 / static_cast<double>(n)) * torch::cos(std::numbers::pi * k * (2 * i + 1) / (2.0 * n));
}

nlohmann::ordered_json nullable(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", *v);
  return buf;
}

std::string table_line(const std::string& system, const std::array<std::string, 5>& cells) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-14s%10s%10s%14s%10s%10s\n", system.c_str(), cells[0].c_str(), cells[1].c_str(),
                cells[2].c_str(), cells[3].c_str(), cells[4].c_str());
  return buf;
}

}  // namespace

torch::Tensor mel_cepstrum(const dsp::MelSpectrogram& mel, int n_coeffs) {
  const long bins = mel.log_mel.size(0);
  ETTS_CHECK(n_coeffs >= 1 && n_coeffs <= bins, "mel_cepstrum: n_coeffs must be in [1, mel_bins]");
  return torch::matmul(dct2_matrix(n_coeffs, bins), mel.log_mel.to(torch::kFloat64)).transpose(0, 1).contiguous();
}

long aligned_frames(long a, long b) {
  if (std::abs(a - b) > kMaxFrameMismatch)
    throw InvalidArgument("frame counts " + std::to_string(a) + " and " + std::to_string(b) + " differ by more than " +
                          std::to_string(kMaxFrameMismatch));
  return std::min(a, b);
}

double mel_cepstral_distortion(const torch::Tensor& cep_a, const torch::Tensor& cep_b) {
  ETTS_CHECK(cep_a.dim() == 2 && cep_b.dim() == 2 && cep_a.size(1) == cep_b.size(1),
             "mel_cepstral_distortion: cepstra must be [frames, coeffs] with equal order");
  const long frames = aligned_frames(cep_a.size(0), cep_b.size(0));
  ETTS_CHECK(frames > 0, "mel_cepstral_distortion: no frames");
  auto diff = cep_a.narrow(0, 0, frames).to(torch::kFloat64) - cep_b.narrow(0, 0, frames).to(torch::kFloat64);
  auto per_frame = torch::sqrt(2.0 * diff.square().sum(1));
  return 10.0 / std::numbers::ln10 * per_frame.mean().item<double>();
}

double mcd(std::span<const float> reference, std::span<const float> synthesized, const AudioConfig& config) {
  auto cep = [&](std::span<const float> w) {
    return mel_cepstrum(dsp::compute_mel_spectrogram(dsp::compute_linear_spectrogram(w, config), config));
  };
  return mel_cepstral_distortion(cep(reference), cep(synthesized));
}

F0Metrics f0_metrics(const dsp::PitchTrack& reference, const dsp::PitchTrack& synthesized) {
  F0Metrics m;
  m.frames = aligned_frames(static_cast<long>(reference.size()), static_cast<long>(synthesized.size()));
  std::vector<double> a, b;
  for (long i = 0; i < m.frames; ++i) {
    const bool va = reference.voiced(i), vb = synthesized.voiced(i);
    if (va != vb) ++m.vuv_mismatches;
    if (va && vb) {
      a.push_back(reference.f0[i]);
      b.push_back(synthesized.f0[i]);
    }
  }
  m.vuv_error_pct = m.frames > 0 ? 100.0 * static_cast<double>(m.vuv_mismatches) / static_cast<double>(m.frames) : 0.0;
  m.joint_voiced = static_cast<long>(a.size());
  if (a.empty()) return m;

  const double n = static_cast<double>(a.size());
  double mean_a = 0, mean_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m.squared_error_sum += (a[i] - b[i]) * (a[i] - b[i]);
    mean_a += a[i];
    mean_b += b[i];
  }
  m.rmse_hz = std::sqrt(m.squared_error_sum / n);
  mean_a /= n;
  mean_b /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - mean_a) * (b[i] - mean_b);
    saa += (a[i] - mean_a) * (a[i] - mean_a);
    sbb += (b[i] - mean_b) * (b[i] - mean_b);
  }
  if (saa > 0 && sbb > 0) m.corr = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  return m;
}

UtteranceMetrics compare_waveforms(std::span<const float> reference, std::span<const float> synthesized,
                                   const AudioConfig& config) {
  UtteranceMetrics u;
  u.mcd_db = mcd(reference, synthesized, config);
  u.f0 = f0_metrics(dsp::extract_f0(reference, config), dsp::extract_f0(synthesized, config));
  u.frames = u.f0.frames;
  return u;
}

SystemRow aggregate(const std::string& system, const std::vector<UtteranceMetrics>& utterances) {
  SystemRow row;
  row.system = system;
  double mcd_weighted = 0, sq = 0, corr_sum = 0;
  long frames = 0, joint = 0, mismatches = 0, corr_count = 0;
  for (const auto& u : utterances) {
    if (u.system != system) continue;
    if (!u.ok) {
      ++row.failures;
      continue;
    }
    ++row.utterances;
    mcd_weighted += u.mcd_db * static_cast<double>(u.frames);
    frames += u.frames;
    sq += u.f0.squared_error_sum;
    joint += u.f0.joint_voiced;
    mismatches += u.f0.vuv_mismatches;
    if (u.f0.corr) {
      corr_sum += *u.f0.corr;
      ++corr_count;
    }
  }
  if (frames > 0) {
    row.mcd_db = mcd_weighted / static_cast<double>(frames);
    row.vuv_error_pct = 100.0 * static_cast<double>(mismatches) / static_cast<double>(frames);
  }
  if (joint > 0) row.f0_rmse_hz = std::sqrt(sq / static_cast<double>(joint));
  if (corr_count > 0) row.f0_corr = corr_sum / static_cast<double>(corr_count);
  return row;
}

const SystemRow& MetricReport::row(const std::string& system) const {
  for (const auto& r : rows)
    if (r.system == system) return r;
  throw InvalidArgument("no report row for system '" + system + "'");
}

std::string MetricReport::to_text() const {
  std::string out = table_line("System", {"MCD (dB)", "BAP (dB)", "F0 RMSE (Hz)", "F0 Corr", "V/UV (%)"});
  for (const auto& r : rows)
    out += table_line(r.system, {cell(r.mcd_db), cell(r.bap_db), cell(r.f0_rmse_hz), cell(r.f0_corr),
                                 cell(r.vuv_error_pct)});
  return out;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["systems"] = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    j["systems"].push_back({{"system", r.system},
                            {"mcd_db", nullable(r.mcd_db)},
                            {"bap_db", nullable(r.bap_db)},
                            {"f0_rmse_hz", nullable(r.f0_rmse_hz)},
                            {"f0_corr", nullable(r.f0_corr)},
                            {"vuv_error_pct", nullable(r.vuv_error_pct)},
                            {"utterances", r.utterances},
                            {"failures", r.failures}});
  j["utterances"] = nlohmann::ordered_json::array();
  for (const auto& u : utterances) {
    nlohmann::ordered_json e{{"system", u.system}, {"utterance", u.utterance}, {"ok", u.ok}};
    if (u.ok) {
      e["frames"] = u.frames;
      e["mcd_db"] = u.mcd_db;
      e["f0_rmse_hz"] = nullable(u.f0.rmse_hz);
      e["f0_corr"] = nullable(u.f0.corr);
      e["vuv_error_pct"] = u.f0.vuv_error_pct;
    } else {
      e["error"] = u.error;
    }
    j["utterances"].push_back(std::move(e));
  }
  return j.dump(2);
}

ResynthesisModels::ResynthesisModels(const std::filesystem::path& checkpoint)
    : config_(read_checkpoint_config(checkpoint)), synthesizer_(load_synthesizer(checkpoint)) {
  torch::serialize::InputArchive archive;
  archive.load_from(checkpoint.string());
  torch::serialize::InputArchive part;
  if (!archive.try_read(checkpoint_keys::kPosterior, part))
    throw IoError(checkpoint.string() + ": checkpoint has no posterior encoder (needed for vocoder resynthesis)");
  posterior_ = PosteriorEncoder(config_.audio.linear_bins(), config_.model.d_latent, config_.model.encoder.d_style,
                                config_.model.posterior);
  posterior_->load(part);
  posterior_->eval();
}

Waveform ResynthesisModels::vocoder(const Waveform& reference, int style_id) {
  ETTS_CHECK(style_id >= 0 && style_id < config_.model.encoder.n_styles, "vocoder: style id out of range");
  torch::NoGradGuard no_grad;
  auto style = synthesizer_->style(torch::tensor({static_cast<long>(style_id)}, torch::kLong));
  auto linear = dsp::compute_linear_spectrogram(reference, config_.audio).magnitude.unsqueeze(0);
  auto z = posterior_(linear, style).mean;
  auto wav = synthesizer_->decoder(z, style).reshape({-1}).contiguous();
  return Waveform(wav.data_ptr<float>(), wav.data_ptr<float>() + wav.numel());
}

Waveform ResynthesisModels::tts(const UtteranceRecord& record, double noise_scale, std::uint64_t seed) {
  SynthesisRequest request;
  request.phoneme_ids = record.phoneme_ids;
  request.style_id = record.style_id;
  request.noise_scale = noise_scale;
  request.seed = seed;
  request.durations = record.durations;
  return synthesize(synthesizer_, request).audio;
}

MetricReport evaluate_corpus(const CorpusManifest& manifest, const std::filesystem::path& checkpoint,
                             const std::filesystem::path& out_dir, const EvaluateOptions& options) {
  ResynthesisModels models(checkpoint);
  const auto& config = models.config();

  const std::vector<std::string> systems{kSystemGroundTruth, kSystemVocoder, kSystemTts};
  MetricReport report;
  for (const auto& rec : manifest.records) {
    if (!options.utterance_ids.empty() &&
        std::find(options.utterance_ids.begin(), options.utterance_ids.end(), rec.id) == options.utterance_ids.end())
      continue;
    Waveform reference;
    try {
      reference = manifest.load_audio(rec, config.audio);
    } catch (const std::exception& e) {
      for (const auto& s : systems) report.utterances.push_back({s, rec.id, false, e.what()});
      LOG(WARNING) << rec.id << ": " << e.what();
      continue;
    }
    for (const auto& system : systems) {
      try {
        Waveform produced;
        if (system == kSystemGroundTruth)
          produced = reference;
        else if (system == kSystemVocoder)
          produced = models.vocoder(reference, rec.style_id);
        else
          produced = models.tts(rec, options.noise_scale, options.seed);
        auto m = compare_waveforms(reference, produced, config.audio);
        m.system = system;
        m.utterance = rec.id;
        report.utterances.push_back(std::move(m));
      } catch (const std::exception& e) {
        LOG(WARNING) << rec.id << " [" << system << "]: " << e.what() << "; excluded from the aggregate";
        report.utterances.push_back({system, rec.id, false, e.what()});
      }
    }
  }
  for (const auto& s : systems) report.rows.push_back(aggregate(s, report.utterances));

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream text(out_dir / "report.txt"), json(out_dir / "report.json");
    if (!text || !json) throw IoError("cannot write report to " + out_dir.string());
    text << report.to_text();
    json << report.to_json() << '\n';
  }
  return report;
}

}  // namespace etts
