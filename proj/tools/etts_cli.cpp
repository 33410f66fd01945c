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

#include <c10/util/Logging.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "etts/config.hpp"
#include "etts/corpus.hpp"
#include "etts/error.hpp"
#include "etts/evaluation.hpp"
#include "etts/plot.hpp"
#include "etts/synthesizer.hpp"
#include "etts/trainer.hpp"
#include "etts/wav.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

fs::path data_dir() {
  const char* env = std::getenv("ETTS_DATA_DIR");
  return env && *env ? fs::path(env) : fs::path("data");
}

struct ConfigFlags {
  std::string preset = "default";
  std::string file;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "Built-in config preset (default, smoke)")->capture_default_str();
    app->add_option("--config", file, "INI config file applied over the preset")->check(CLI::ExistingFile);
    app->add_option("--set", overrides, "Override one value, e.g. --set training.total_steps=100");
  }

  etts::Config resolve() const {
    auto config = etts::Config::preset(preset);
    if (!file.empty()) config = etts::Config::load(file, config);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw etts::InvalidArgument("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    config.validate();
    return config;
  }
};

std::vector<int> parse_ids(const std::string& text) {
  std::vector<int> ids;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      ids.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw etts::InvalidArgument("bad phoneme id '" + tok + "'");
    }
  }
  return ids;
}

const etts::UtteranceRecord& find_record(const etts::CorpusManifest& manifest, const std::string& id) {
  for (const auto& r : manifest.records)
    if (r.id == id) return r;
  throw etts::InvalidArgument("utterance '" + id + "' not in manifest");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"etts: expressive TTS training, synthesis and evaluation"};
  app.require_subcommand(1);
  int log_level = 0;
  app.add_option("--log-level", log_level, "0 info, 1 warning, 2 error")->capture_default_str()->check(CLI::Range(0, 3));

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic multi-style corpus (WAVs + manifest)");
  etts::CorpusOptions corpus_opts;
  fs::path gen_out;
  ConfigFlags gen_cfg;
  gen->add_option("--out", gen_out, "Output directory (default $ETTS_DATA_DIR or ./data)");
  gen->add_option("--utterances", corpus_opts.n_utterances)->capture_default_str();
  gen->add_option("--styles", corpus_opts.n_styles)->capture_default_str();
  gen->add_option("--seed", corpus_opts.seed)->capture_default_str();
  gen_cfg.attach(gen);

  // train
  auto* train = app.add_subcommand("train", "Train from a manifest");
  fs::path train_manifest, train_out = "run", resume;
  std::optional<std::uint64_t> train_seed;
  std::optional<long> train_steps;
  ConfigFlags train_cfg;
  train->add_option("--manifest", train_manifest, "Corpus manifest (default $ETTS_DATA_DIR/manifest.tsv)");
  train->add_option("--out", train_out, "Run directory")->capture_default_str();
  train->add_option("--seed", train_seed, "Training seed (overrides config)");
  train->add_option("--steps", train_steps, "Total steps (overrides config)");
  train->add_option("--resume", resume, "Checkpoint to resume from")->check(CLI::ExistingFile);
  train_cfg.attach(train);

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "Synthesize a waveform from a checkpoint");
  fs::path synth_ckpt, synth_out = "out.wav", synth_manifest;
  std::string phonemes, utterance;
  int style_id = 0;
  double noise_scale = 0.667;
  std::uint64_t synth_seed = 0;
  bool gt_durations = false;
  synth->add_option("--checkpoint", synth_ckpt)->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out)->capture_default_str();
  auto* ph_opt = synth->add_option("--phonemes", phonemes, "Comma-separated phoneme ids");
  auto* utt_opt = synth->add_option("--utterance", utterance, "Take phonemes and style from a manifest entry");
  synth->add_option("--manifest", synth_manifest, "Manifest for --utterance (default $ETTS_DATA_DIR/manifest.tsv)");
  synth->add_option("--style", style_id)->capture_default_str();
  synth->add_option("--noise-scale", noise_scale)->capture_default_str()->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_flag("--gt-durations", gt_durations, "Use the manifest durations (needs --utterance)");
  ph_opt->excludes(utt_opt);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Objective metrics: GT, GT (vocoder), TTS");
  fs::path eval_manifest, eval_ckpt, eval_out = "report";
  etts::EvaluateOptions eval_opts;
  eval->add_option("--manifest", eval_manifest, "Corpus manifest (default $ETTS_DATA_DIR/manifest.tsv)");
  eval->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "Report directory")->capture_default_str();
  eval->add_option("--noise-scale", eval_opts.noise_scale)->capture_default_str()->check(CLI::NonNegativeNumber);
  eval->add_option("--seed", eval_opts.seed)->capture_default_str();
  eval->add_option("--utterance", eval_opts.utterance_ids, "Restrict to these utterance ids");

  // plot
  auto* plot = app.add_subcommand("plot", "Pitch-contour and spectrogram figures for one utterance");
  fs::path plot_manifest, plot_ckpt, plot_out = "figures";
  std::string plot_utt;
  double plot_noise = 0.667;
  std::uint64_t plot_seed = 0;
  plot->add_option("--manifest", plot_manifest, "Corpus manifest (default $ETTS_DATA_DIR/manifest.tsv)");
  plot->add_option("--checkpoint", plot_ckpt)->required()->check(CLI::ExistingFile);
  plot->add_option("--utterance", plot_utt)->required();
  plot->add_option("--out", plot_out)->capture_default_str();
  plot->add_option("--noise-scale", plot_noise)->capture_default_str()->check(CLI::NonNegativeNumber);
  plot->add_option("--seed", plot_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  FLAGS_caffe2_log_level = log_level;
  auto manifest_path = [](const fs::path& given) { return given.empty() ? data_dir() / "manifest.tsv" : given; };

  try {
    if (*gen) {
      const auto config = gen_cfg.resolve();
      const auto out = gen_out.empty() ? data_dir() : gen_out;
      corpus_opts.n_phonemes = config.model.encoder.n_phonemes;
      const auto manifest = etts::generate_synthetic_corpus(corpus_opts, config.audio, out);
      LOG(INFO) << "wrote " << manifest.records.size() << " utterances to " << out.string();
    } else if (*train) {
      auto config = train_cfg.resolve();
      if (train_seed) config.training.seed = *train_seed;
      if (train_steps) config.training.total_steps = *train_steps;
      config.validate();
      const auto manifest = etts::CorpusManifest::load(manifest_path(train_manifest));
      manifest.validate(config.audio, config.model.encoder.n_phonemes, config.model.encoder.n_styles);
      etts::TrainOptions options;
      options.out_dir = train_out;
      options.resume_from = resume;
      const auto latest = etts::train(config, manifest, options);
      LOG(INFO) << "final checkpoint " << latest.string();
    } else if (*synth) {
      if (phonemes.empty() && utterance.empty()) {
        std::cerr << "synthesize: one of --phonemes or --utterance is required\n" << synth->help();
        return kExitUsage;
      }
      if (gt_durations && utterance.empty()) {
        std::cerr << "synthesize: --gt-durations needs --utterance\n" << synth->help();
        return kExitUsage;
      }
      auto network = etts::load_synthesizer(synth_ckpt);
      etts::SynthesisRequest request;
      request.noise_scale = noise_scale;
      request.seed = synth_seed;
      if (!utterance.empty()) {
        const auto manifest = etts::CorpusManifest::load(manifest_path(synth_manifest));
        const auto& rec = find_record(manifest, utterance);
        request.phoneme_ids = rec.phoneme_ids;
        request.style_id = rec.style_id;
        if (gt_durations) request.durations = rec.durations;
      } else {
        request.phoneme_ids = parse_ids(phonemes);
        request.style_id = style_id;
      }
      const auto result = etts::synthesize(network, request);
      etts::write_wav(synth_out, result.audio, network->config().audio.sample_rate);
      LOG(INFO) << "wrote " << result.audio.size() << " samples to " << synth_out.string();
    } else if (*eval) {
      const auto manifest = etts::CorpusManifest::load(manifest_path(eval_manifest));
      const auto report = etts::evaluate_corpus(manifest, eval_ckpt, eval_out, eval_opts);
      std::cout << report.to_text();
    } else if (*plot) {
      const auto manifest = etts::CorpusManifest::load(manifest_path(plot_manifest));
      const auto& rec = find_record(manifest, plot_utt);
      etts::ResynthesisModels models(plot_ckpt);
      const auto reference = manifest.load_audio(rec, models.config().audio);
      std::vector<etts::NamedWaveform> systems{
          {etts::kSystemVocoder, models.vocoder(reference, rec.style_id)},
          {etts::kSystemTts, models.tts(rec, plot_noise, plot_seed)},
      };
      const auto files = etts::plot_outputs(rec.id, reference, systems, models.config().audio, plot_out);
      LOG(INFO) << "wrote " << files.pitch.string() << " and " << files.spectrogram.string();
    }
  } catch (const std::exception& e) {
    std::cerr << "etts: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
