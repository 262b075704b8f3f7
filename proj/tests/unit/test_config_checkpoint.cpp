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

#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mbmelgan/checkpoint.hpp"
#include "mbmelgan/config.hpp"
#include "mbmelgan/error.hpp"
#include "mbmelgan/signals.hpp"
#include "mbmelgan/training.hpp"

using namespace mbmelgan;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "mbmelgan_unit";
  fs::create_directories(dir);
  return dir;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

Checkpoint small_checkpoint() {
  Checkpoint c;
  c.metadata.set("kind", "test");
  c.metadata.set("note", "hello world");
  c.add("a", {2, 3}, {1.0, -2.5, 3.25, 0.0, 1e-8, 7.0});
  c.add("b.c", {1}, {0.1});
  return c;
}

void put_u32(std::vector<std::uint8_t>& bytes, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void reseal(std::vector<std::uint8_t>& bytes) {
  const std::uint64_t d =
      fnv1a64(std::span<const std::uint8_t>(bytes.data(), bytes.size() - 8));
  for (int i = 0; i < 8; ++i) bytes[bytes.size() - 8 + i] = static_cast<std::uint8_t>(d >> (8 * i));
}

}  // namespace

TEST_CASE("settings parsing") {
  const Settings s = Settings::parse("# comment\n a.b = 1 \n\nc_d=two words\n# another\n", "cfg");
  CHECK(s.get("a.b") == "1");
  CHECK(s.get("c_d") == "two words");
  CHECK(s.where("c_d") == "cfg:4");
  CHECK(Settings::parse(s.serialize()).entries().size() == 2);
  CHECK(error_of([] { Settings::parse("x=1\nx=2\n", "f"); }).find("f:2") != std::string::npos);
  CHECK(error_of([] { Settings::parse("novalue\n", "f"); }).find("f:1") != std::string::npos);
  CHECK(error_of([] { Settings::parse("bad key=1\n", "f"); }).find("bad key") != std::string::npos);
  CHECK(error_of([&] { s.get("missing.key"); }).find("missing.key") != std::string::npos);
  CHECK(error_of([] { get_size(Settings::parse("n=abc"), "n"); }).find("n") != std::string::npos);
}

TEST_CASE("specs round trip through settings") {
  for (const char* name : {"mb", "fb", "basic", "desk-mb", "tiny"}) {
    GeneratorSpec spec = GeneratorSpec::preset(name);
    spec.residual = ResidualMode::Identity;
    Settings s;
    store_generator_spec(s, spec);
    const GeneratorSpec back = load_generator_spec(Settings::parse(s.serialize()));
    CHECK(back == spec);
  }
  Settings s;
  store_discriminator_spec(s, DiscriminatorSpec::desk());
  CHECK(load_discriminator_spec(s) == DiscriminatorSpec::desk());
  LossConfig loss = LossConfig::for_variant(Variant::FB);
  loss.lambda = 1.0 / 3.0;
  store_loss_config(s, loss);
  CHECK(load_loss_config(Settings::parse(s.serialize()), Variant::FB) == loss);
  MelConfig mel;
  mel.fmin = 55.5;
  store_mel_config(s, mel);
  CHECK(load_mel_config(s, 80) == mel);
  const PqmfBank bank = design_pqmf();
  store_pqmf(s, bank);
  const PqmfBank back = load_pqmf(Settings::parse(s.serialize()));
  CHECK(back.prototype == bank.prototype);
  CHECK(back.analysis == bank.analysis);
  CHECK(back.cutoff_ratio == bank.cutoff_ratio);
}

TEST_CASE("training configuration files") {
  const fs::path dir = temp_dir() / "cfg";
  fs::create_directories(dir);
  const TrainConfig c = TrainConfig::from_settings(
      Settings::parse("model.variant=mb\ntrain.batch_size=2\nloss.lambda=2.5\ndata.wav=a.wav,b.wav\n",
                      "train.cfg"),
      dir.string());
  CHECK(c.batch_size == 2);
  CHECK(c.generator.entry_channels == GeneratorSpec::desk().entry_channels);
  REQUIRE(c.wav_paths.size() == 2);
  CHECK(c.wav_paths[1] == (dir / "b.wav").string());
  CHECK(c.crop_samples() == 16000);
  CHECK(c.crop_frames() == 80);

  const std::string unknown = error_of([] {
    TrainConfig::from_settings(Settings::parse("train.batch_size=2\ntrain.bach=3\n", "x.cfg"));
  });
  CHECK(unknown.find("train.bach") != std::string::npos);
  CHECK(unknown.find("x.cfg:2") != std::string::npos);

  TrainConfig bad = TrainConfig::desk();
  bad.lr_floor = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = TrainConfig::desk();
  bad.crop_seconds = 0.0123;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = TrainConfig::desk();
  bad.loss = LossConfig::for_variant(Variant::FB);
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const TrainConfig full = TrainConfig::full_scale(Variant::MB);
  CHECK(full.batch_size == 128);
  CHECK(full.lr_g == 1e-4);
  CHECK(full.pretrain_steps == 200000);
  CHECK(TrainConfig::full_scale(Variant::FB).batch_size == 48);

  Settings stored;
  c.store(stored);
  const TrainConfig again = TrainConfig::from_settings(Settings::parse(stored.serialize()));
  CHECK(again.generator == c.generator);
  CHECK(again.batch_size == c.batch_size);
  CHECK(again.lr_g == c.lr_g);
  CHECK(again.wav_paths == c.wav_paths);
}

TEST_CASE("checkpoint container round trip") {
  const Checkpoint c = small_checkpoint();
  const auto bytes = encode_checkpoint(c, TensorDtype::F64);
  CHECK(std::memcmp(bytes.data(), "MBMG", 4) == 0);
  const Checkpoint d = decode_checkpoint(bytes);
  CHECK(d.metadata.get("note") == "hello world");
  CHECK(d.metadata.get("tensor_dtype") == "f64");
  CHECK(d.tensor("a").values == c.tensor("a").values);
  CHECK(d.tensor("a").shape == Shape{2, 3});
  CHECK(encode_checkpoint(d, TensorDtype::F64) == bytes);

  const Checkpoint f = decode_checkpoint(encode_checkpoint(c, TensorDtype::F32));
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(f.tensor("a").values[i] == static_cast<double>(static_cast<float>(c.tensor("a").values[i])));
  CHECK_THROWS_AS(d.tensor("zzz"), FormatError);
}

TEST_CASE("any single corrupted byte is detected") {
  const auto bytes = encode_checkpoint(small_checkpoint(), TensorDtype::F32);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto bad = bytes;
    bad[i] ^= 0x5a;
    INFO("byte " << i);
    CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
  }
  for (std::size_t n : {0u, 4u, 11u, 20u}) {
    CHECK_THROWS_AS(decode_checkpoint(std::span(bytes.data(), n)), FormatError);
  }
  auto versioned = bytes;
  put_u32(versioned, 4, 99);
  reseal(versioned);
  CHECK(error_of([&] { decode_checkpoint(versioned); }).find("version") != std::string::npos);
}

TEST_CASE("checkpoint files and parameter loading") {
  const auto path = (temp_dir() / "p.mbmg").string();
  Generator gen(GeneratorSpec::tiny(), 3);
  Checkpoint c;
  store_parameters(c, gen.named_parameters());
  write_checkpoint(path, c, TensorDtype::F64);
  CHECK_FALSE(fs::exists(path + ".tmp"));

  Generator other(GeneratorSpec::tiny(), 4);
  load_parameters(read_checkpoint(path), other.named_parameters());
  const auto a = gen.parameters(), b = other.parameters();
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::equal(a[i].data().begin(), a[i].data().end(), b[i].data().begin()));

  // A mismatched entry is rejected before anything is copied.
  Generator fresh(GeneratorSpec::tiny(), 5);
  const auto before = fresh.parameters()[0].clone();
  Checkpoint broken = read_checkpoint(path);
  broken.tensors.back().shape = {broken.tensors.back().values.size(), 1, 1, 1};
  CHECK_THROWS(load_parameters(broken, fresh.named_parameters()));
  const auto after = fresh.parameters()[0];
  CHECK(std::equal(before.data().begin(), before.data().end(), after.data().begin()));
}

TEST_CASE("model checkpoints carry everything inference needs") {
  const auto spec = GeneratorSpec::desk(Variant::MB);
  const Generator gen(spec, 2);
  const PqmfBank bank = design_pqmf();
  FeatureStats stats{std::vector<double>(80, -3.0), std::vector<double>(80, 2.0)};
  const Checkpoint c = make_model_checkpoint(gen, MelConfig{}, &stats, &bank, 17);
  const ModelBundle b = load_model(decode_checkpoint(encode_checkpoint(c, TensorDtype::F64)));
  CHECK(b.spec == spec);
  CHECK(b.step == 17);
  REQUIRE(b.stats);
  CHECK(b.stats->stddev[5] == 2.0);
  REQUIRE(b.pqmf);
  CHECK(b.pqmf->synthesis == bank.synthesis);
  const Tensor mel({80, 3}, 0.25);
  const Tensor y1 = gen.forward(mel), y2 = b.generator.forward(mel);
  CHECK(std::equal(y1.data().begin(), y1.data().end(), y2.data().begin()));

  Checkpoint no_bank = make_model_checkpoint(gen, MelConfig{}, nullptr, nullptr);
  CHECK_THROWS(load_model(no_bank));
}

TEST_CASE("mel feature files") {
  const auto path = (temp_dir() / "x.mel").string();
  AudioBuffer audio;
  audio.samples = signals::speech_like(3000);
  const auto mel = mel_spectrogram(audio);
  write_mel_file(path, mel, MelConfig{});
  const MelFile f = read_mel_file(path);
  CHECK(f.mel.frames == mel.frames);
  CHECK(f.config == MelConfig{});
  for (std::size_t i = 0; i < mel.values.size(); ++i)
    CHECK(f.mel.values[i] == static_cast<double>(static_cast<float>(mel.values[i])));
  MelSpectrogram empty;
  empty.n_mels = 80;
  CHECK_THROWS(write_mel_file((temp_dir() / "empty.mel").string(), empty, MelConfig{}));
  CHECK_FALSE(fs::exists(temp_dir() / "empty.mel"));
}
