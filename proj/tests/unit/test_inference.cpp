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

#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "mbmelgan/checkpoint.hpp"
#include "mbmelgan/error.hpp"
#include "mbmelgan/inference.hpp"
#include "mbmelgan/pqmf.hpp"

using namespace mbmelgan;

namespace {

ModelBundle bundle_for(const std::string& preset, std::uint64_t seed) {
  const auto spec = GeneratorSpec::preset(preset);
  std::optional<PqmfBank> pqmf;
  if (spec.variant == Variant::MB) pqmf = design_pqmf();
  return {spec, MelConfig{}, std::nullopt, pqmf, Generator(spec, seed), "model", 0};
}

MelSpectrogram random_mel(std::size_t frames, std::uint64_t seed, std::size_t n_mels = 80) {
  MelSpectrogram m;
  m.frames = frames;
  m.n_mels = n_mels;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  m.values.resize(frames * n_mels);
  for (auto& v : m.values) v = d(rng);
  return m;
}

}  // namespace

TEST_CASE("32-bit engine tracks the 64-bit generator") {
  for (const char* preset : {"desk-mb", "desk-fb", "desk-basic", "mb"}) {
    const ModelBundle b = bundle_for(preset, 3);
    const Vocoder v(b);
    const MelSpectrogram mel = random_mel(6, 4);
    const auto fast = v.generate(mel);
    NoGradGuard guard;
    const Tensor ref = b.generator.forward(mel_input(mel.values, mel.frames, mel.n_mels));
    REQUIRE(fast.size() == ref.numel());
    double worst = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i)
      worst = std::max(worst, std::abs(static_cast<double>(fast[i]) - ref.data()[i]));
    INFO(preset << " max abs error " << worst);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("chunked synthesis equals whole-input synthesis") {
  for (const char* preset : {"desk-mb", "desk-fb"}) {
    const Vocoder v(bundle_for(preset, 5));
    const MelSpectrogram mel = random_mel(3 * v.context_frames() + 5, 6);
    const auto whole = v.generate(mel);
    for (std::size_t chunk : {1u, 4u, 13u, 64u}) {
      for (std::size_t threads : {1u, 3u}) {
        const auto part = v.generate(mel, chunk, threads);
        REQUIRE(part.size() == whole.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < whole.size(); ++i)
          worst = std::max(worst, static_cast<double>(std::abs(part[i] - whole[i])));
        INFO(preset << " chunk " << chunk << " threads " << threads << " error " << worst);
        CHECK(worst <= 1e-6);
      }
    }
  }
}

TEST_CASE("synthesis emits 200 samples per frame and is deterministic") {
  const Vocoder v(bundle_for("desk-mb", 7));
  for (std::size_t t : {1u, 7u, 80u}) {
    const MelSpectrogram mel = random_mel(t, t);
    const auto a = v.synthesize(mel);
    const auto b = v.synthesize(mel);
    CHECK(a.size() == 200 * t);
    CHECK(a == b);
    for (double x : a) CHECK(std::abs(x) <= 1.0);
  }
  const Vocoder fb(bundle_for("desk-fb", 7));
  CHECK(fb.synthesize(random_mel(7, 1)).size() == 1400);
}

TEST_CASE("normalization statistics from the checkpoint are applied") {
  ModelBundle b = bundle_for("desk-mb", 8);
  FeatureStats stats{std::vector<double>(80, -4.0), std::vector<double>(80, 2.0)};
  b.stats = stats;
  const Vocoder v(b);
  const MelSpectrogram raw = random_mel(5, 2);
  CHECK(v.synthesize(raw) == v.synthesize_normalized(normalize(raw, stats)));
}

TEST_CASE("invalid inputs are rejected") {
  const Vocoder v(bundle_for("desk-mb", 1));
  CHECK_THROWS_AS(v.generate(random_mel(4, 1, 40)), ShapeError);
  MelSpectrogram empty;
  empty.n_mels = 80;
  CHECK_THROWS_AS(v.generate(empty), ShapeError);
  ModelBundle no_bank = bundle_for("desk-mb", 1);
  no_bank.pqmf.reset();
  CHECK_THROWS_AS(Vocoder{no_bank}, ConfigError);
}

TEST_CASE("vocoder loads from a model checkpoint file") {
  const ModelBundle b = bundle_for("desk-mb", 9);
  const auto path = (std::filesystem::temp_directory_path() / "mbmelgan_unit_model.mbmg").string();
  write_checkpoint(path, make_model_checkpoint(b.generator, b.features, nullptr, &*b.pqmf),
                   TensorDtype::F32);
  const Vocoder loaded = Vocoder::load(path);
  const Vocoder direct(b);
  const MelSpectrogram mel = random_mel(4, 3);
  const auto x = loaded.synthesize(mel), y = direct.synthesize(mel);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - y[i]) < 1e-5);
}

TEST_CASE("benchmark report") {
  const Vocoder v(bundle_for("desk-mb", 1));
  BenchOptions o;
  o.seconds = 0.5;
  o.threads = 2;
  o.iterations = 2;
  const BenchReport r = bench(v, o);
  CHECK(r.thread_count == 2);
  CHECK(r.iterations == 2);
  CHECK(r.audio_seconds == doctest::Approx(0.5));
  CHECK(r.rtf == doctest::Approx(r.wall_seconds / r.audio_seconds));
  CHECK(r.samples_per_second == doctest::Approx(8000.0 / r.wall_seconds));
  CHECK(r.to_text().find("thread_count=2") != std::string::npos);
  o.seconds = 0.0;
  CHECK_THROWS_AS(bench(v, o), ConfigError);
}
