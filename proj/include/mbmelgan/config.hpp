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

#pragma once

// Dotted key=value settings, used for training configuration files and for
// checkpoint metadata. Lines are `key=value`; blank lines and lines starting
// with '#' are ignored. Each entry remembers where it came from so errors can
// point at a file and line.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mbmelgan/dsp.hpp"
#include "mbmelgan/losses.hpp"
#include "mbmelgan/models.hpp"
#include "mbmelgan/pqmf.hpp"

namespace mbmelgan {

struct SettingEntry {
  std::string value;
  std::size_t line = 0;  // 0 for programmatically set entries
};

class Settings {
 public:
  Settings() = default;
  explicit Settings(std::string source) : source_(std::move(source)) {}

  static Settings parse(std::string_view text, const std::string& source = "<text>");
  static Settings load_file(const std::string& path);

  // Sorted key=value lines; parse(serialize()) reproduces the entries.
  std::string serialize() const;

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  // Throws ConfigError naming the key when absent.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  void erase(const std::string& key) { entries_.erase(key); }

  // "source:line" for an entry, or just the source.
  std::string where(const std::string& key) const;
  const std::string& source() const { return source_; }
  const std::map<std::string, SettingEntry>& entries() const { return entries_; }

 private:
  std::string source_ = "<settings>";
  std::map<std::string, SettingEntry> entries_;
};

// Typed accessors. Parse failures name the key and its location.
std::size_t get_size(const Settings& s, const std::string& key);
double get_double(const Settings& s, const std::string& key);
std::string format_double(double v);

// Each store/load pair round-trips exactly. Loaders start from defaults (or
// from the `*.preset` key when present), override the keys that exist, and
// add every key they read to `consumed`.
void store_generator_spec(Settings& s, const GeneratorSpec& spec);
GeneratorSpec load_generator_spec(const Settings& s, std::set<std::string>* consumed = nullptr);

void store_discriminator_spec(Settings& s, const DiscriminatorSpec& spec);
DiscriminatorSpec load_discriminator_spec(const Settings& s,
                                          std::set<std::string>* consumed = nullptr);

void store_loss_config(Settings& s, const LossConfig& config);
LossConfig load_loss_config(const Settings& s, Variant variant,
                            std::set<std::string>* consumed = nullptr);

// Feature keys; n_mels is taken from the generator spec.
void store_mel_config(Settings& s, const MelConfig& config);
MelConfig load_mel_config(const Settings& s, std::size_t n_mels,
                          std::set<std::string>* consumed = nullptr);

// Stores the prototype so loading never repeats the design search.
void store_pqmf(Settings& s, const PqmfBank& bank);
PqmfBank load_pqmf(const Settings& s);
bool has_pqmf(const Settings& s);

}  // namespace mbmelgan
