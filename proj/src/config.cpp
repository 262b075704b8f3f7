// Copyright 2026 The mbmelgan Authors
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

#include "mbmelgan/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mbmelgan/error.hpp"

namespace mbmelgan {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

[[noreturn]] void bad_value(const Settings& s, const std::string& key, const std::string& what) {
  throw ConfigError(s.where(key) + ": invalid value '" + s.get(key) + "' for key '" + key +
                    "': " + what);
}

std::size_t parse_size_text(const std::string& text, bool& ok) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  ok = !text.empty() && r.ec == std::errc() && r.ptr == end;
  return v;
}

std::vector<std::size_t> get_size_list(const Settings& s, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& part : split(s.get(key), ',')) {
    bool ok = false;
    const std::size_t v = parse_size_text(part, ok);
    if (!ok) bad_value(s, key, "expected a comma-separated list of non-negative integers");
    out.push_back(v);
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string join_resolutions(const std::vector<StftResolution>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out += (i ? "," : "") + std::to_string(v[i].fft_size) + "/" +
           std::to_string(v[i].window_size) + "/" + std::to_string(v[i].hop_size);
  }
  return out;
}

std::vector<StftResolution> get_resolutions(const Settings& s, const std::string& key) {
  std::vector<StftResolution> out;
  for (const auto& part : split(s.get(key), ',')) {
    const auto f = split(part, '/');
    bool ok = f.size() == 3;
    StftResolution r;
    if (ok) {
      bool a = false, b = false, c = false;
      r.fft_size = parse_size_text(f[0], a);
      r.window_size = parse_size_text(f[1], b);
      r.hop_size = parse_size_text(f[2], c);
      ok = a && b && c;
    }
    if (!ok) bad_value(s, key, "expected fft/window/hop triples separated by commas");
    try {
      r.validate();
    } catch (const Error& e) {
      bad_value(s, key, e.what());
    }
    out.push_back(r);
  }
  return out;
}

// Reads a key only if present, recording it as consumed.
class Reader {
 public:
  Reader(const Settings& s, std::set<std::string>* consumed) : s_(s), consumed_(consumed) {}

  bool has(const std::string& key) {
    if (!s_.has(key)) return false;
    if (consumed_) consumed_->insert(key);
    return true;
  }
  void size(const std::string& key, std::size_t& out) {
    if (has(key)) out = get_size(s_, key);
  }
  void real(const std::string& key, double& out) {
    if (has(key)) out = get_double(s_, key);
  }
  void sizes(const std::string& key, std::vector<std::size_t>& out) {
    if (has(key)) out = get_size_list(s_, key);
  }
  const Settings& settings() const { return s_; }

 private:
  const Settings& s_;
  std::set<std::string>* consumed_;
};

template <typename Fn>
auto with_location(const Settings& s, const std::string& key, Fn fn) {
  try {
    return fn(s.get(key));
  } catch (const ConfigError& e) {
    throw ConfigError(s.where(key) + ": key '" + key + "': " + e.what());
  }
}

}  // namespace

Settings Settings::parse(std::string_view text, const std::string& source) {
  Settings s(source);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!valid_key(key)) throw ConfigError(where + ": malformed key '" + key + "'");
    if (s.entries_.count(key)) {
      throw ConfigError(where + ": duplicate key '" + key + "' (first set on line " +
                        std::to_string(s.entries_[key].line) + ")");
    }
    s.entries_[key] = {trim(std::string_view(line).substr(eq + 1)), line_no};
  }
  return s;
}

Settings Settings::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string Settings::serialize() const {
  std::string out;
  for (const auto& [k, e] : entries_) out += k + "=" + e.value + "\n";
  return out;
}

void Settings::set(const std::string& key, std::string value) {
  if (!valid_key(key)) throw ConfigError("malformed settings key '" + key + "'");
  if (value.find('\n') != std::string::npos || value.find('\r') != std::string::npos) {
    throw ConfigError("settings value for '" + key + "' contains a line break");
  }
  entries_[key] = {trim(value), 0};
}

const std::string& Settings::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(source_ + ": missing key '" + key + "'");
  return it->second.value;
}

std::string Settings::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

std::string Settings::where(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end() || it->second.line == 0) return source_;
  return source_ + ":" + std::to_string(it->second.line);
}

std::size_t get_size(const Settings& s, const std::string& key) {
  bool ok = false;
  const std::size_t v = parse_size_text(s.get(key), ok);
  if (!ok) bad_value(s, key, "expected a non-negative integer");
  return v;
}

double get_double(const Settings& s, const std::string& key) {
  const std::string& text = s.get(key);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) bad_value(s, key, "expected a number");
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void store_generator_spec(Settings& s, const GeneratorSpec& spec) {
  s.set("model.variant", variant_name(spec.variant));
  s.set("model.n_mels", std::to_string(spec.n_mels));
  s.set("model.entry_channels", std::to_string(spec.entry_channels));
  s.set("model.upsample_factors", join_sizes(spec.upsample_factors));
  s.set("model.stage_channels", join_sizes(spec.stage_channels));
  s.set("model.dilations", join_sizes(spec.resstack_dilations));
  s.set("model.kernel", std::to_string(spec.kernel));
  s.set("model.out_channels", std::to_string(spec.out_channels));
  s.set("model.entry_kernel", std::to_string(spec.entry_kernel));
  s.set("model.exit_kernel", std::to_string(spec.exit_kernel));
  s.set("model.slope", format_double(spec.slope));
  s.set("model.residual", residual_name(spec.residual));
}

GeneratorSpec load_generator_spec(const Settings& s, std::set<std::string>* consumed) {
  Reader r(s, consumed);
  GeneratorSpec spec;
  if (r.has("model.preset")) {
    spec = with_location(s, "model.preset", [](const std::string& v) {
      return GeneratorSpec::preset(v);
    });
  } else if (s.has("model.variant")) {
    const Variant v = with_location(s, "model.variant", parse_variant);
    spec = v == Variant::MB ? GeneratorSpec::mb()
                            : v == Variant::FB ? GeneratorSpec::fb() : GeneratorSpec::basic();
  }
  if (r.has("model.variant")) spec.variant = with_location(s, "model.variant", parse_variant);
  r.size("model.n_mels", spec.n_mels);
  r.size("model.entry_channels", spec.entry_channels);
  r.sizes("model.upsample_factors", spec.upsample_factors);
  r.sizes("model.stage_channels", spec.stage_channels);
  r.sizes("model.dilations", spec.resstack_dilations);
  r.size("model.kernel", spec.kernel);
  r.size("model.out_channels", spec.out_channels);
  r.size("model.entry_kernel", spec.entry_kernel);
  r.size("model.exit_kernel", spec.exit_kernel);
  r.real("model.slope", spec.slope);
  if (r.has("model.residual")) {
    spec.residual = with_location(s, "model.residual", parse_residual);
  }
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(s.source() + ": " + e.what());
  }
  return spec;
}

void store_discriminator_spec(Settings& s, const DiscriminatorSpec& spec) {
  s.set("disc.num_scales", std::to_string(spec.num_scales));
  std::string layers;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    layers += (i ? "," : "") + std::to_string(l.out_channels) + ":" + std::to_string(l.kernel) +
              ":" + std::to_string(l.stride) + ":" + std::to_string(l.groups);
  }
  s.set("disc.layers", layers);
  s.set("disc.slope", format_double(spec.slope));
  s.set("disc.pool_kernel", std::to_string(spec.pool_kernel));
  s.set("disc.pool_stride", std::to_string(spec.pool_stride));
  s.set("disc.pool_padding", std::to_string(spec.pool_padding));
}

DiscriminatorSpec load_discriminator_spec(const Settings& s, std::set<std::string>* consumed) {
  Reader r(s, consumed);
  DiscriminatorSpec spec = DiscriminatorSpec::full();
  if (r.has("disc.preset")) {
    spec = with_location(s, "disc.preset", [](const std::string& v) {
      return DiscriminatorSpec::preset(v);
    });
  }
  r.size("disc.num_scales", spec.num_scales);
  if (r.has("disc.layers")) {
    spec.layers.clear();
    for (const auto& part : split(s.get("disc.layers"), ',')) {
      const auto f = split(part, ':');
      bool ok = f.size() == 4;
      DiscLayerSpec l;
      if (ok) {
        bool a = false, b = false, c = false, d = false;
        l.out_channels = parse_size_text(f[0], a);
        l.kernel = parse_size_text(f[1], b);
        l.stride = parse_size_text(f[2], c);
        l.groups = parse_size_text(f[3], d);
        ok = a && b && c && d;
      }
      if (!ok) bad_value(s, "disc.layers", "expected out:kernel:stride:groups entries");
      spec.layers.push_back(l);
    }
  }
  r.real("disc.slope", spec.slope);
  r.size("disc.pool_kernel", spec.pool_kernel);
  r.size("disc.pool_stride", spec.pool_stride);
  r.size("disc.pool_padding", spec.pool_padding);
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(s.source() + ": " + e.what());
  }
  return spec;
}

void store_loss_config(Settings& s, const LossConfig& config) {
  s.set("loss.mode", loss_mode_name(config.mode));
  s.set("loss.lambda", format_double(config.lambda));
  s.set("loss.full_band", join_resolutions(config.full_band_resolutions));
  s.set("loss.sub_band", join_resolutions(config.sub_band_resolutions));
}

LossConfig load_loss_config(const Settings& s, Variant variant, std::set<std::string>* consumed) {
  Reader r(s, consumed);
  LossConfig c = LossConfig::for_variant(variant);
  if (r.has("loss.mode")) {
    c.mode = with_location(s, "loss.mode", parse_loss_mode);
    c.lambda = c.mode == LossMode::FeatureMatching ? 10.0 : 2.5;
  }
  r.real("loss.lambda", c.lambda);
  if (r.has("loss.full_band")) c.full_band_resolutions = get_resolutions(s, "loss.full_band");
  if (r.has("loss.sub_band")) c.sub_band_resolutions = get_resolutions(s, "loss.sub_band");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(s.source() + ": " + e.what());
  }
  return c;
}

void store_mel_config(Settings& s, const MelConfig& c) {
  s.set("features.sample_rate", std::to_string(c.sample_rate));
  s.set("features.fft_size", std::to_string(c.fft_size));
  s.set("features.window_size", std::to_string(c.window_size));
  s.set("features.hop_size", std::to_string(c.hop_size));
  s.set("features.n_mels", std::to_string(c.n_mels));
  s.set("features.fmin", format_double(c.fmin));
  s.set("features.fmax", format_double(c.fmax));
  s.set("features.floor", format_double(c.floor));
}

MelConfig load_mel_config(const Settings& s, std::size_t n_mels, std::set<std::string>* consumed) {
  Reader r(s, consumed);
  MelConfig c;
  c.n_mels = n_mels;
  std::size_t rate = static_cast<std::size_t>(c.sample_rate);
  r.size("features.sample_rate", rate);
  c.sample_rate = static_cast<int>(rate);
  r.size("features.fft_size", c.fft_size);
  r.size("features.window_size", c.window_size);
  r.size("features.hop_size", c.hop_size);
  if (r.has("features.n_mels") && get_size(s, "features.n_mels") != n_mels) {
    bad_value(s, "features.n_mels", "must equal model.n_mels (" + std::to_string(n_mels) + ")");
  }
  r.real("features.fmin", c.fmin);
  r.real("features.fmax", c.fmax);
  r.real("features.floor", c.floor);
  if (c.hop_size != kSamplesPerFrame) {
    bad_value(s, "features.hop_size",
              "the generator upsamples by " + std::to_string(kSamplesPerFrame));
  }
  return c;
}

void store_pqmf(Settings& s, const PqmfBank& bank) {
  s.set("pqmf.bands", std::to_string(bank.num_bands));
  s.set("pqmf.taps", std::to_string(bank.taps));
  s.set("pqmf.kaiser_beta", format_double(bank.kaiser_beta));
  s.set("pqmf.cutoff_ratio", format_double(bank.cutoff_ratio));
  std::string proto;
  for (std::size_t i = 0; i < bank.prototype.size(); ++i) {
    proto += (i ? "," : "") + format_double(bank.prototype[i]);
  }
  s.set("pqmf.prototype", proto);
}

bool has_pqmf(const Settings& s) { return s.has("pqmf.prototype"); }

PqmfBank load_pqmf(const Settings& s) {
  std::vector<double> proto;
  for (const auto& part : split(s.get("pqmf.prototype"), ',')) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size()) {
      bad_value(s, "pqmf.prototype", "expected comma-separated numbers");
    }
    proto.push_back(v);
  }
  if (proto.size() != get_size(s, "pqmf.taps")) {
    bad_value(s, "pqmf.prototype", "length differs from pqmf.taps");
  }
  return pqmf_from_prototype(get_size(s, "pqmf.bands"), std::move(proto),
                             get_double(s, "pqmf.kaiser_beta"), get_double(s, "pqmf.cutoff_ratio"));
}

}  // namespace mbmelgan
