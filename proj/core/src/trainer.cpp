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

#include "etts/trainer.hpp"

#include <c10/util/Logging.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "etts/checkpoint_keys.hpp"
#include "etts/error.hpp"
#include "etts/features.hpp"

namespace etts {
namespace {

std::vector<torch::Tensor> concat(std::initializer_list<std::vector<torch::Tensor>> parts) {
  std::vector<torch::Tensor> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::uint64_t step_seed(std::uint64_t seed, long step) {
  // splitmix64 of (seed, step): independent, reproducible stream per step.
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(step + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return (x ^ (x >> 31)) & 0x7fffffffffffffffULL;
}

void require_finite(const torch::Tensor& t, const char* name, long step) {
  if (!std::isfinite(t.item<double>())) throw NonFiniteLoss(name, step);
}

}  // namespace

std::vector<PreparedUtterance> prepare_corpus(const CorpusManifest& manifest, const Config& config) {
  const auto& audio_cfg = config.audio;
  std::vector<PreparedUtterance> out;
  for (const auto& rec : manifest.records) {
    ETTS_CHECK(rec.style_id >= 0 && rec.style_id < config.model.encoder.n_styles,
               rec.id + ": style id out of range for this model");
    for (int p : rec.phoneme_ids)
      ETTS_CHECK(p >= 0 && p < config.model.encoder.n_phonemes, rec.id + ": phoneme id out of range");
    const auto audio = manifest.load_audio(rec, audio_cfg);
    const long frames = rec.total_frames();
    ETTS_CHECK(dsp::frame_count(static_cast<long>(audio.size()), audio_cfg) == frames,
               rec.id + ": durations do not match the audio frame count");
    ETTS_CHECK(frames >= config.training.segment_frames, rec.id + ": utterance shorter than a training segment");

    PreparedUtterance u;
    u.record = rec;
    u.audio = torch::zeros({frames * audio_cfg.hop_size});
    u.audio.narrow(0, 0, static_cast<long>(audio.size()))
        .copy_(torch::from_blob(const_cast<float*>(audio.data()), {static_cast<long>(audio.size())}));
    u.linear = dsp::compute_linear_spectrogram(audio, audio_cfg).magnitude.unsqueeze(0);
    const auto pitch = dsp::extract_f0(audio, audio_cfg);
    const auto targets = dsp::phoneme_level_targets(pitch, rec.durations);
    u.targets.durations = rec.durations;
    u.targets.pitch_hz = targets.mean_f0;
    u.targets.range_hz = targets.f0_range;
    out.push_back(std::move(u));
  }
  ETTS_CHECK(!out.empty(), "prepare_corpus: empty manifest");
  return out;
}

SampleWindow segment_window(long start_frame, long frames, int hop) { return {start_frame * hop, frames * hop}; }

Trainer::Trainer(const Config& config, std::vector<PreparedUtterance> corpus)
    : config_(config), corpus_(std::move(corpus)), mel_loss_(config.audio) {
  config_.validate();
  torch::manual_seed(config_.training.seed);
  synthesizer_ = SynthesizerNetwork(config_);
  posterior_ = PosteriorEncoder(config_.audio.linear_bins(), config_.model.d_latent, config_.model.encoder.d_style,
                                config_.model.posterior);
  discriminators_ = DiscriminatorSet(config_.model.discriminator);

  const auto& t = config_.training;
  auto adam = torch::optim::AdamOptions(t.learning_rate).betas({t.beta1, t.beta2}).eps(t.adam_eps);
  optimizer_g_ = std::make_unique<torch::optim::Adam>(
      concat({synthesizer_->parameters(), posterior_->parameters()}), adam);
  optimizer_d_ = std::make_unique<torch::optim::Adam>(discriminators_->parameters(), adam);
}

void Trainer::set_learning_rate() {
  const auto& t = config_.training;
  const double lr = t.learning_rate * std::pow(t.lr_decay, static_cast<double>(step_));
  for (auto* opt : {optimizer_g_.get(), optimizer_d_.get()})
    for (auto& group : opt->param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

LossReport Trainer::train_step() {
  const auto& t = config_.training;
  const int hop = config_.audio.hop_size;
  set_learning_rate();
  const auto seed = step_seed(t.seed, step_);
  torch::manual_seed(seed);  // dropout
  auto generator = make_generator(seed);

  synthesizer_->train();
  posterior_->train();
  discriminators_->train();

  const long n = static_cast<long>(corpus_.size());
  const long batch = std::min<long>(t.batch_size, n);
  auto order = torch::randperm(n, generator, torch::kLong);

  std::vector<torch::Tensor> z_segments, styles, audio_segments;
  torch::Tensor kl_sum, variance_sum;
  for (long b = 0; b < batch; ++b) {
    const auto& u = corpus_[order[b].item<long>()];
    auto path = synthesizer_->encode(u.record.phoneme_ids, u.record.style_id, std::span<const int>(u.targets.durations),
                                     std::span<const double>(u.targets.pitch_hz),
                                     std::span<const double>(u.targets.range_hz));
    auto variance = variance_losses(path.variances, u.targets, config_.model.variance.pitch_scale_hz);
    auto posterior = posterior_(u.linear, path.style);
    auto z = sample_latent(posterior, 1.0, generator);
    auto flowed = synthesizer_->flow(z, path.c, path.style);
    auto kl = kl_loss(z, posterior, flowed, path.prior);
    kl_sum = kl_sum.defined() ? kl_sum + kl : kl;
    variance_sum = variance_sum.defined() ? variance_sum + variance : variance;

    const long frames = u.linear.size(2);
    const long start = torch::randint(0, frames - t.segment_frames + 1, {1}, generator, torch::kLong).item<long>();
    const auto window = segment_window(start, t.segment_frames, hop);
    z_segments.push_back(z.narrow(2, start, t.segment_frames));
    styles.push_back(path.style);
    audio_segments.push_back(u.audio.narrow(0, window.start, window.length));
  }
  auto kl = kl_sum / static_cast<double>(batch);
  auto variance = variance_sum / static_cast<double>(batch);

  auto real = torch::stack(audio_segments);
  auto fake = synthesizer_->decoder(torch::cat(z_segments), torch::cat(styles));

  // Discriminator update on the detached fake.
  auto d_real = discriminators_(real);
  auto d_fake = discriminators_(fake.detach());
  auto loss_d = discriminator_adversarial_loss(d_real, d_fake);
  require_finite(loss_d, "adv_d", step_);
  optimizer_d_->zero_grad();
  loss_d.backward();
  optimizer_d_->step();
  if (phase_hook_) phase_hook_("discriminator");

  // Generator-side update.
  DiscriminatorOutputs g_real;
  {
    torch::NoGradGuard no_grad;
    g_real = discriminators_(real);
  }
  auto g_fake = discriminators_(fake);
  auto adv_g = generator_adversarial_loss(g_fake);
  auto fm = feature_matching_loss(g_real, g_fake);
  auto mel = mel_loss_(fake, real);
  require_finite(kl, "kl", step_);
  require_finite(variance, "variance", step_);
  require_finite(adv_g, "adv_g", step_);
  require_finite(fm, "fm", step_);
  require_finite(mel, "mel", step_);

  auto f64 = [](const torch::Tensor& x) { return x.to(torch::kFloat64); };
  auto total = f64(adv_g) + t.lambda_fm * f64(fm) + t.lambda_mel * f64(mel) + t.kl_weight * f64(kl) + f64(variance);
  optimizer_g_->zero_grad();
  total.backward();
  optimizer_g_->step();
  if (phase_hook_) phase_hook_("generator");

  LossReport report;
  report.step = step_;
  report.kl = f64(kl).item<double>();
  report.adv_g = f64(adv_g).item<double>();
  report.adv_d = f64(loss_d).item<double>();
  report.fm = f64(fm).item<double>();
  report.mel = f64(mel).item<double>();
  report.variance = f64(variance).item<double>();
  report.total_g = total.item<double>();
  report.total_d = report.adv_d;
  report.learning_rate = optimizer_g_->param_groups()[0].options().get_lr();
  ++step_;
  return report;
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  namespace keys = checkpoint_keys;
  torch::serialize::OutputArchive root;
  torch::serialize::OutputArchive synth, post, disc, opt_g, opt_d;
  synthesizer_->save(synth);
  posterior_->save(post);
  discriminators_->save(disc);
  optimizer_g_->save(opt_g);
  optimizer_d_->save(opt_d);
  root.write(keys::kSynthesizer, synth);
  root.write(keys::kPosterior, post);
  root.write(keys::kDiscriminators, disc);
  root.write(keys::kGeneratorOptimizer, opt_g);
  root.write(keys::kDiscriminatorOptimizer, opt_d);
  root.write(keys::kStep, c10::IValue(static_cast<int64_t>(step_)));
  root.write(keys::kConfigHash, c10::IValue(static_cast<int64_t>(config_.hash())));
  root.write(keys::kConfigText, c10::IValue(config_.to_text()));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  try {
    root.save_to(tmp);
  } catch (const c10::Error& e) {
    throw IoError("cannot write checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

void Trainer::load_checkpoint(const std::filesystem::path& path) {
  namespace keys = checkpoint_keys;
  torch::serialize::InputArchive root;
  try {
    root.load_from(path.string());
  } catch (const c10::Error& e) {
    throw IoError("cannot read checkpoint " + path.string());
  }
  c10::IValue hash, step;
  if (!root.try_read(keys::kConfigHash, hash) || !root.try_read(keys::kStep, step))
    throw IoError(path.string() + ": not a training checkpoint");
  if (static_cast<std::uint64_t>(hash.toInt()) != config_.hash())
    throw InvalidArgument(path.string() + ": checkpoint config hash does not match the current config");

  auto read_part = [&](const char* key, auto&& load) {
    torch::serialize::InputArchive part;
    if (!root.try_read(key, part)) throw IoError(path.string() + ": missing '" + key + "'");
    load(part);
  };
  read_part(keys::kSynthesizer, [&](auto& a) { synthesizer_->load(a); });
  read_part(keys::kPosterior, [&](auto& a) { posterior_->load(a); });
  read_part(keys::kDiscriminators, [&](auto& a) { discriminators_->load(a); });
  read_part(keys::kGeneratorOptimizer, [&](auto& a) { optimizer_g_->load(a); });
  read_part(keys::kDiscriminatorOptimizer, [&](auto& a) { optimizer_d_->load(a); });
  step_ = step.toInt();
}

std::vector<ParameterGroup> Trainer::parameter_groups() const {
  std::vector<ParameterGroup> groups{
      {"style_embedding", synthesizer_->style->parameters()},
      {"phoneme_encoder", synthesizer_->phoneme_encoder->parameters()},
      {"frame_encoder", synthesizer_->frame_encoder->parameters()},
      {"prior_projection", synthesizer_->prior_projection->parameters()},
      {"variance_adaptor", synthesizer_->variance->parameters()},
      {"flow", synthesizer_->flow->parameters()},
      {"posterior_encoder", posterior_->parameters()},
      {"decoder", synthesizer_->decoder->parameters()},
  };
  const auto subs = discriminators_->submodule_parameters();
  const auto& periods = config_.model.discriminator.periods;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const auto name = i < periods.size() ? "mpd_period" + std::to_string(periods[i])
                                         : "mrd_resolution" + std::to_string(i - periods.size());
    groups.push_back({name, subs[i]});
  }
  return groups;
}

std::filesystem::path train(const Config& config, const CorpusManifest& manifest, const TrainOptions& options) {
  config.validate();
  std::filesystem::create_directories(options.out_dir);
  Trainer trainer(config, prepare_corpus(manifest, config));
  if (!options.resume_from.empty()) {
    trainer.load_checkpoint(options.resume_from);
    LOG(INFO) << "resumed from " << options.resume_from.string() << " at step " << trainer.step();
  }
  config.save(options.out_dir / "config.ini");

  std::ofstream log(options.out_dir / "losses.jsonl", std::ios::app);
  if (!log) throw IoError("cannot open loss log in " + options.out_dir.string());

  const auto& t = config.training;
  while (trainer.step() < t.total_steps) {
    const auto report = trainer.train_step();
    log << report.to_json() << '\n';
    log.flush();
    if (options.on_step) options.on_step(report);
    if (trainer.step() % 50 == 0 || trainer.step() == 1) {
      char line[160];
      std::snprintf(line, sizeof(line), "step %6ld  mel %.4f  kl %.4f  var %.4f  adv_g %.4f  fm %.4f  adv_d %.4f",
                    trainer.step(), report.mel, report.kl, report.variance, report.adv_g, report.fm, report.adv_d);
      LOG(INFO) << line;
    }
    if (t.checkpoint_interval > 0 && trainer.step() % t.checkpoint_interval == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%07ld.pt", trainer.step());
      trainer.save_checkpoint(options.out_dir / name);
    }
  }
  const auto latest = options.out_dir / "latest.pt";
  trainer.save_checkpoint(latest);
  return latest;
}

}  // namespace etts
