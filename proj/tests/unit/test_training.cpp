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
#include <fstream>

#include "doctest.h"
#include "mbmelgan/error.hpp"
#include "mbmelgan/signals.hpp"
#include "mbmelgan/training.hpp"

using namespace mbmelgan;
namespace fs = std::filesystem;

namespace {

TrainConfig small_config(Variant variant = Variant::MB) {
  TrainConfig c = TrainConfig::desk(variant);
  c.batch_size = 2;
  c.crop_seconds = 0.25;
  c.pretrain_steps = 3;
  c.total_steps = 6;
  c.seed = 11;
  return c;
}

Corpus small_corpus(const TrainConfig& c, std::vector<std::string>* warnings = nullptr) {
  std::vector<std::pair<std::string, AudioBuffer>> clips;
  for (std::uint64_t s = 1; s <= 2; ++s) {
    AudioBuffer a;
    a.samples = signals::speech_like(6000 + 1000 * s, s);
    clips.emplace_back("clip" + std::to_string(s), a);
  }
  AudioBuffer tiny;
  tiny.samples = signals::speech_like(1000, 9);
  clips.emplace_back("short", tiny);
  return Corpus::from_audio(clips, c.features, c.crop_samples(), nullptr,
                            [&](const std::string& m) {
                              if (warnings) warnings->push_back(m);
                            });
}

std::vector<std::vector<double>> snapshot(const std::vector<Tensor>& params) {
  std::vector<std::vector<double>> out;
  for (const auto& p : params) out.emplace_back(p.data().begin(), p.data().end());
  return out;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  CHECK(lr_at(0, 1e-4, 100000, 1e-6) == 1e-4);
  CHECK(lr_at(99999, 1e-4, 100000, 1e-6) == 1e-4);
  CHECK(lr_at(100000, 1e-4, 100000, 1e-6) == 5e-5);
  CHECK(lr_at(10000000, 1e-4, 100000, 1e-6) == 1e-6);
  double prev = 1.0;
  for (std::size_t s = 0; s < 3000000; s += 7919) {
    const double lr = lr_at(s, 1e-4, 100000, 1e-6);
    CHECK(lr <= prev);
    CHECK(lr >= 1e-6);
    prev = lr;
  }
}

TEST_CASE("crops are hop aligned, paired with their frames and seeded") {
  const TrainConfig c = small_config();
  std::vector<std::string> warnings;
  const Corpus corpus = small_corpus(c, &warnings);
  CHECK(corpus.clips().size() == 2);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("short") != std::string::npos);

  std::mt19937_64 r1(5), r2(5);
  for (int i = 0; i < 4; ++i) {
    const Batch a = crop_batch(corpus, c, r1);
    const Batch b = crop_batch(corpus, c, r2);
    CHECK(a.origins == b.origins);
    CHECK(a.audio.shape() == Shape{2, 1, 4000});
    CHECK(a.mel.shape() == Shape{2, 80, 20});
    for (std::size_t j = 0; j < 2; ++j) {
      const auto& clip = corpus.clips()[a.origins[j].first];
      const std::size_t f0 = a.origins[j].second;
      for (std::size_t n : {0u, 1234u, 3999u})
        CHECK(a.audio.data()[j * 4000 + n] == clip.audio.samples[200 * f0 + n]);
      CHECK(a.mel.data()[(j * 80 + 7) * 20 + 3] == clip.mel.at(f0 + 3, 7));
    }
  }
  TrainConfig full = c;
  full.crop_seconds = 1.0;
  CHECK(full.crop_frames() == 80);
  CHECK_THROWS_AS(small_corpus(full), ConfigError);  // every clip is shorter than one second
}

TEST_CASE("pretraining never touches the discriminator") {
  const TrainConfig c = small_config();
  Trainer t(c, small_corpus(c));
  const auto d0 = snapshot(t.discriminator().parameters());
  const auto g0 = snapshot(t.generator().parameters());
  for (std::size_t i = 0; i < c.pretrain_steps; ++i) {
    CHECK(t.phase() == Phase::Pretrain);
    const StepLog log = t.step();
    CHECK(log.phase == Phase::Pretrain);
    CHECK(std::isfinite(log.stft));
  }
  CHECK(snapshot(t.discriminator().parameters()) == d0);
  CHECK(snapshot(t.generator().parameters()) != g0);
  CHECK(t.phase() == Phase::Adversarial);
}

TEST_CASE("discriminator and generator updates are isolated") {
  for (Variant v : {Variant::MB, Variant::BASIC}) {
    TrainConfig c = small_config(v);
    Trainer t(c, small_corpus(c));
    const Batch batch = t.next_batch();
    const auto g0 = snapshot(t.generator().parameters());
    const auto d0 = snapshot(t.discriminator().parameters());
    t.update_discriminator(batch, 1e-3);
    CHECK(snapshot(t.generator().parameters()) == g0);
    const auto d1 = snapshot(t.discriminator().parameters());
    CHECK(d1 != d0);
    const auto upd = t.update_generator(batch, 1e-3);
    CHECK(std::isfinite(upd.total));
    CHECK(snapshot(t.discriminator().parameters()) == d1);
    CHECK(snapshot(t.generator().parameters()) != g0);
  }
}

TEST_CASE("identical seeds give identical runs and checkpoints") {
  const TrainConfig c = small_config();
  Trainer a(c, small_corpus(c));
  Trainer b(c, small_corpus(c));
  for (std::size_t i = 0; i < c.total_steps; ++i) {
    const StepLog la = a.step(), lb = b.step();
    CHECK(la.to_line() == lb.to_line());
    CHECK(la.stft == lb.stft);
  }
  CHECK(encode_checkpoint(a.state_checkpoint(), TensorDtype::F64) ==
        encode_checkpoint(b.state_checkpoint(), TensorDtype::F64));
}

TEST_CASE("resuming reproduces the uninterrupted run") {
  TrainConfig c = small_config();
  c.total_steps = 8;
  Trainer straight(c, small_corpus(c));
  for (int i = 0; i < 4; ++i) straight.step();
  const auto bytes = encode_checkpoint(straight.state_checkpoint(), TensorDtype::F64);
  std::vector<StepLog> expected;
  for (int i = 0; i < 4; ++i) expected.push_back(straight.step());

  Trainer resumed = Trainer::resume(decode_checkpoint(bytes), small_corpus(c));
  CHECK(resumed.current_step() == 4);
  for (int i = 0; i < 4; ++i) {
    const StepLog log = resumed.step();
    CHECK(log.to_line() == expected[i].to_line());
    CHECK(log.stft == expected[i].stft);
    CHECK(log.d_loss == expected[i].d_loss);
  }
  CHECK(encode_checkpoint(resumed.state_checkpoint(), TensorDtype::F64) ==
        encode_checkpoint(straight.state_checkpoint(), TensorDtype::F64));
}

TEST_CASE("run_training writes a loss log and checkpoints") {
  const fs::path dir = fs::temp_directory_path() / "mbmelgan_unit" / "run";
  fs::remove_all(dir);
  fs::create_directories(dir);
  TrainConfig c = small_config();
  c.checkpoint_every = 3;
  Trainer t(c, small_corpus(c));
  const RunSummary s = run_training(t, {dir.string(), {}});
  CHECK(s.steps == c.total_steps);
  CHECK(fs::exists(dir / "final.mbmg"));
  CHECK(fs::exists(dir / "model.mbmg"));
  CHECK(fs::exists(dir / "ckpt_3.mbmg"));
  std::ifstream log(dir / "loss.log");
  std::string line;
  std::size_t n = 0;
  while (std::getline(log, line)) {
    CHECK(line.find(n < c.pretrain_steps ? " pretrain " : " adversarial ") != std::string::npos);
    ++n;
  }
  CHECK(n == c.total_steps);
  const ModelBundle b = load_model(read_checkpoint((dir / "model.mbmg").string()));
  CHECK(b.step == c.total_steps);
  CHECK(b.stats.has_value());
}

TEST_CASE("a non-finite loss aborts with the step in the message") {
  const TrainConfig c = small_config();
  Trainer t(c, small_corpus(c));
  Batch batch = t.next_batch();
  batch.mel.data_mut()[0] = std::numeric_limits<double>::infinity();
  try {
    t.pretrain_step(batch);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
  }
}
