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

#include "etts/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <type_traits>

#include "etts/error.hpp"

namespace etts {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_scalar(const std::string& key, const std::string& text) {
  std::istringstream in(trim(text));
  T value{};
  in >> value;
  if (in.fail() || !in.eof()) throw InvalidArgument("config: bad value for " + key + ": '" + text + "'");
  return value;
}

template <>
bool parse_scalar<bool>(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw InvalidArgument("config: bad boolean for " + key + ": '" + text + "'");
}

std::vector<int> parse_ints(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(parse_scalar<int>(key, tok));
  if (out.empty()) throw InvalidArgument("config: empty list for " + key);
  return out;
}

std::string join(const std::vector<int>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
  return out.str();
}

// Nested lists are written as groups separated by ';'.
std::vector<std::vector<int>> parse_groups(const std::string& key, const std::string& text) {
  std::vector<std::vector<int>> out;
  std::istringstream in(text);
  std::string group;
  while (std::getline(in, group, ';')) out.push_back(parse_ints(key, group));
  return out;
}

std::string join_groups(const std::vector<std::vector<int>>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "; " : "") + join(v[i]);
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

struct Field {
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
  bool hashed = true;
};

using FieldTable = std::map<std::string, std::map<std::string, Field>>;

#define ETTS_SCALAR(section, member, path, type)                                           \
  table[section][#member] = Field{                                                         \
      [](const Config& c) {                                                                \
        if constexpr (std::is_floating_point_v<type>) return fmt_double(c.path.member);    \
        else if constexpr (std::is_same_v<type, bool>) return std::string(c.path.member ? "true" : "false"); \
        else return std::to_string(c.path.member);                                         \
      },                                                                                   \
      [](Config& c, const std::string& v) {                                                \
        c.path.member = parse_scalar<type>(section "." #member, v);                        \
      }}

#define ETTS_INTS(section, member, path)                                                   \
  table[section][#member] = Field{                                                         \
      [](const Config& c) { return join(c.path.member); },                                 \
      [](Config& c, const std::string& v) { c.path.member = parse_ints(section "." #member, v); }}

const FieldTable& fields() {
  static const FieldTable instance = [] {
    FieldTable table;
    ETTS_SCALAR("audio", sample_rate, audio, int);
    ETTS_SCALAR("audio", fft_size, audio, int);
    ETTS_SCALAR("audio", win_size, audio, int);
    ETTS_SCALAR("audio", hop_size, audio, int);
    ETTS_SCALAR("audio", mel_bins, audio, int);
    ETTS_SCALAR("audio", fmin, audio, double);
    ETTS_SCALAR("audio", fmax, audio, double);
    ETTS_SCALAR("audio", f0_min, audio, double);
    ETTS_SCALAR("audio", f0_max, audio, double);
    ETTS_SCALAR("audio", voicing_threshold, audio, double);

    ETTS_SCALAR("model", d_latent, model, int);

    ETTS_SCALAR("encoder", n_phonemes, model.encoder, int);
    ETTS_SCALAR("encoder", n_styles, model.encoder, int);
    ETTS_SCALAR("encoder", d_model, model.encoder, int);
    ETTS_SCALAR("encoder", d_style, model.encoder, int);
    ETTS_SCALAR("encoder", n_heads, model.encoder, int);
    ETTS_SCALAR("encoder", phoneme_blocks, model.encoder, int);
    ETTS_SCALAR("encoder", frame_blocks, model.encoder, int);
    ETTS_SCALAR("encoder", conv_kernel, model.encoder, int);
    ETTS_SCALAR("encoder", pitch_bins, model.encoder, int);
    ETTS_SCALAR("encoder", range_bins, model.encoder, int);
    ETTS_SCALAR("encoder", pitch_min_hz, model.encoder, double);
    ETTS_SCALAR("encoder", pitch_max_hz, model.encoder, double);
    ETTS_SCALAR("encoder", range_max_hz, model.encoder, double);

    ETTS_SCALAR("variance", filter_channels, model.variance, int);
    ETTS_SCALAR("variance", kernel, model.variance, int);
    ETTS_SCALAR("variance", dropout, model.variance, double);
    ETTS_SCALAR("variance", pitch_scale_hz, model.variance, double);

    ETTS_SCALAR("flow", n_couplings, model.flow, int);
    ETTS_SCALAR("flow", wavenet_layers, model.flow, int);
    ETTS_SCALAR("flow", kernel, model.flow, int);
    ETTS_SCALAR("flow", dilation_rate, model.flow, int);
    ETTS_SCALAR("flow", mean_only, model.flow, bool);
    ETTS_SCALAR("flow", condition_on_frames, model.flow, bool);

    ETTS_SCALAR("posterior", hidden, model.posterior, int);
    ETTS_SCALAR("posterior", layers, model.posterior, int);
    ETTS_SCALAR("posterior", kernel, model.posterior, int);
    ETTS_SCALAR("posterior", dilation_rate, model.posterior, int);

    ETTS_INTS("generator", upsample_rates, model.generator);
    ETTS_SCALAR("generator", initial_channels, model.generator, int);
    ETTS_INTS("generator", amp_kernel_sizes, model.generator);
    table["generator"]["amp_dilations"] = Field{
        [](const Config& c) { return join_groups(c.model.generator.amp_dilations); },
        [](Config& c, const std::string& v) {
          c.model.generator.amp_dilations = parse_groups("generator.amp_dilations", v);
        }};
    ETTS_SCALAR("generator", snake_alpha_init, model.generator, double);
    ETTS_SCALAR("generator", lowpass_taps, model.generator, int);
    ETTS_SCALAR("generator", lowpass_beta, model.generator, double);

    ETTS_INTS("discriminator", periods, model.discriminator);
    ETTS_INTS("discriminator", mpd_channels, model.discriminator);
    table["discriminator"]["resolutions"] = Field{
        [](const Config& c) {
          std::vector<std::vector<int>> groups;
          for (const auto& r : c.model.discriminator.resolutions)
            groups.push_back({r.fft_size, r.hop_size, r.win_size});
          return join_groups(groups);
        },
        [](Config& c, const std::string& v) {
          std::vector<StftResolution> out;
          for (const auto& g : parse_groups("discriminator.resolutions", v)) {
            if (g.size() != 3)
              throw InvalidArgument("config: discriminator.resolutions needs fft hop win triples");
            out.push_back({g[0], g[1], g[2]});
          }
          c.model.discriminator.resolutions = out;
        }};
    ETTS_SCALAR("discriminator", mrd_channels, model.discriminator, int);

    ETTS_SCALAR("training", lambda_fm, training, double);
    ETTS_SCALAR("training", lambda_mel, training, double);
    ETTS_SCALAR("training", kl_weight, training, double);
    ETTS_SCALAR("training", learning_rate, training, double);
    ETTS_SCALAR("training", beta1, training, double);
    ETTS_SCALAR("training", beta2, training, double);
    ETTS_SCALAR("training", adam_eps, training, double);
    ETTS_SCALAR("training", lr_decay, training, double);
    ETTS_SCALAR("training", batch_size, training, int);
    ETTS_SCALAR("training", segment_frames, training, int);
    ETTS_SCALAR("training", total_steps, training, long);
    ETTS_SCALAR("training", checkpoint_interval, training, long);
    ETTS_SCALAR("training", seed, training, std::uint64_t);
    table["training"]["total_steps"].hashed = false;
    table["training"]["checkpoint_interval"].hashed = false;
    return table;
  }();
  return instance;
}

#undef ETTS_SCALAR
#undef ETTS_INTS

}  // namespace

void AudioConfig::validate() const {
  ETTS_CHECK(sample_rate > 0, "audio.sample_rate must be positive");
  ETTS_CHECK(hop_size > 0 && win_size > 0 && fft_size > 0, "audio: sizes must be positive");
  ETTS_CHECK(fft_size >= win_size, "audio.fft_size must be >= audio.win_size");
  ETTS_CHECK(mel_bins > 0, "audio.mel_bins must be positive");
  ETTS_CHECK(fmin >= 0.0 && fmax > fmin && fmax <= sample_rate / 2.0, "audio: need 0 <= fmin < fmax <= Nyquist");
  ETTS_CHECK(f0_min > 0.0 && f0_max > f0_min, "audio: need 0 < f0_min < f0_max");
}

int GeneratorConfig::total_upsampling() const {
  return std::accumulate(upsample_rates.begin(), upsample_rates.end(), 1, std::multiplies<>());
}

Config Config::defaults() { return Config{}; }

Config Config::smoke() {
  Config c;
  c.model.d_latent = 64;
  c.model.encoder.d_model = 64;
  c.model.encoder.d_style = 16;
  c.model.encoder.phoneme_blocks = 2;
  c.model.encoder.frame_blocks = 2;
  c.model.variance.filter_channels = 64;
  c.model.posterior.hidden = 64;
  c.model.posterior.layers = 8;
  c.model.generator.initial_channels = 128;
  c.model.discriminator.mpd_channels = {16, 32, 64, 128, 128};
  c.model.discriminator.mrd_channels = 16;
  c.training.segment_frames = 16;
  c.training.learning_rate = 1e-3;
  c.training.lr_decay = 0.9998;
  c.training.total_steps = 2000;
  c.training.checkpoint_interval = 500;
  return c;
}

Config Config::preset(const std::string& name) {
  if (name == "default") return defaults();
  if (name == "smoke") return smoke();
  throw InvalidArgument("unknown config preset '" + name + "'");
}

void Config::set(const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos) throw InvalidArgument("config key must be section.key: " + dotted_key);
  const auto section = dotted_key.substr(0, dot);
  const auto key = dotted_key.substr(dot + 1);
  const auto& table = fields();
  const auto s = table.find(section);
  if (s == table.end()) throw InvalidArgument("unknown config section '" + section + "'");
  const auto f = s->second.find(key);
  if (f == s->second.end()) throw InvalidArgument("unknown config key '" + dotted_key + "'");
  f->second.set(*this, value);
}

namespace {

Config apply_tree(const boost::property_tree::ptree& tree, Config base) {
  for (const auto& [section, keys] : tree) {
    if (keys.empty()) throw InvalidArgument("config: top-level key '" + section + "' outside a section");
    for (const auto& [key, value] : keys) base.set(section + "." + key, value.data());
  }
  base.validate();
  return base;
}

}  // namespace

Config Config::load(const std::filesystem::path& path, Config base) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw IoError("cannot read config " + path.string() + ": " + e.message());
  }
  return apply_tree(tree, std::move(base));
}

Config Config::parse(const std::string& text, Config base) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidArgument("cannot parse config text: " + e.message());
  }
  return apply_tree(tree, std::move(base));
}

std::string Config::to_text() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, keys] : fields()) {
    out << (first ? "" : "\n") << "[" << section << "]\n";
    first = false;
    for (const auto& [key, field] : keys) out << key << " = " << field.get(*this) << "\n";
  }
  return out.str();
}

void Config::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config " + path.string());
  out << to_text();
}

std::uint64_t Config::hash() const {
  // FNV-1a over the canonical text of the hashed fields.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [section, keys] : fields())
    for (const auto& [key, field] : keys)
      if (field.hashed) mix(section + "." + key + "=" + field.get(*this) + "\n");
  return h;
}

void Config::validate() const {
  audio.validate();
  const auto& g = model.generator;
  ETTS_CHECK(g.total_upsampling() == audio.hop_size,
             "generator.upsample_rates must multiply to audio.hop_size");
  for (int r : g.upsample_rates) ETTS_CHECK(r >= 2 && r % 2 == 0, "generator.upsample_rates must be even");
  ETTS_CHECK(g.initial_channels >> g.upsample_rates.size() >= 1, "generator.initial_channels too small");
  ETTS_CHECK(g.amp_kernel_sizes.size() == g.amp_dilations.size(),
             "generator.amp_dilations needs one group per kernel size");
  ETTS_CHECK(g.lowpass_taps >= 4 && g.lowpass_taps % 2 == 0, "generator.lowpass_taps must be even and >= 4");
  ETTS_CHECK(model.d_latent >= 2, "model.d_latent must be >= 2");
  ETTS_CHECK(model.encoder.n_styles >= 1 && model.encoder.n_phonemes >= 1, "encoder sizes must be positive");
  ETTS_CHECK(model.encoder.d_model % model.encoder.n_heads == 0, "encoder.d_model must divide by n_heads");
  ETTS_CHECK(training.lambda_fm > 0 && training.lambda_mel > 0, "training: lambda_fm and lambda_mel must be > 0");
  ETTS_CHECK(training.segment_frames >= 8, "training.segment_frames must be >= 8");
  ETTS_CHECK(training.batch_size >= 1, "training.batch_size must be >= 1");
}

}  // namespace etts
