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

// Two-phase training: generator pretraining on the STFT objective, then
// alternating discriminator/generator updates.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mbmelgan/checkpoint.hpp"
#include "mbmelgan/config.hpp"
#include "mbmelgan/dsp.hpp"
#include "mbmelgan/losses.hpp"
#include "mbmelgan/models.hpp"
#include "mbmelgan/optim.hpp"
#include "mbmelgan/pqmf.hpp"

namespace mbmelgan {

enum class Phase { Pretrain, Adversarial };

std::string phase_name(Phase phase);

struct TrainConfig {
  GeneratorSpec generator = GeneratorSpec::desk();
  DiscriminatorSpec discriminator = DiscriminatorSpec::desk();
  LossConfig loss = LossConfig::for_variant(Variant::MB);
  MelConfig features;
  std::size_t batch_size = 4;
  double crop_seconds = 1.0;
  double lr_g = 3e-4;
  double lr_d = 3e-4;
  std::size_t lr_halve_every = 300;
  double lr_floor = 1e-6;
  std::size_t pretrain_steps = 300;
  std::size_t total_steps = 800;
  std::uint64_t seed = 1;
  // Weight of the newest value in the smoothed STFT loss.
  double smoothing = 0.1;
  std::size_t checkpoint_every = 0;  // 0: only at the end
  AdamOptions adam;
  std::vector<std::string> wav_paths;

  // Full-scale settings: learning rate 1e-4 halved every 100K steps down to
  // 1e-6, 200K pretraining steps, batch 128 (MB) or 48 (FB, basic).
  static TrainConfig full_scale(Variant variant);
  // Laptop-scale settings: reduced widths, batch 4, 300 + 500 steps.
  static TrainConfig desk(Variant variant = Variant::MB);

  std::size_t crop_samples() const;
  std::size_t crop_frames() const;
  void validate() const;

  // Unknown keys are errors naming the key and its line. Relative wav paths
  // resolve against `base_dir`.
  static TrainConfig from_settings(const Settings& s, const std::string& base_dir = "");
  static TrainConfig load(const std::string& path);
  void store(Settings& s) const;
};

// max(lr0 * 0.5^floor(step / halve_every), floor)
double lr_at(std::size_t step, double lr0, std::size_t halve_every, double floor);
double lr_at(std::size_t step, const TrainConfig& config);

struct TrainingClip {
  std::string name;
  AudioBuffer audio;
  MelSpectrogram mel;  // normalized
};

class Corpus {
 public:
  using Warn = std::function<void(const std::string&)>;

  // Clips shorter than min_samples are skipped with a warning; an empty
  // result is an error. With `stats` null the statistics are fitted here.
  static Corpus from_audio(std::vector<std::pair<std::string, AudioBuffer>> clips,
                           const MelConfig& features, std::size_t min_samples,
                           const FeatureStats* stats = nullptr, const Warn& warn = {});
  static Corpus from_wavs(const std::vector<std::string>& paths, const MelConfig& features,
                          std::size_t min_samples, const FeatureStats* stats = nullptr,
                          const Warn& warn = {});

  const std::vector<TrainingClip>& clips() const { return clips_; }
  const FeatureStats& stats() const { return stats_; }

 private:
  std::vector<TrainingClip> clips_;
  FeatureStats stats_;
};

struct Batch {
  Tensor audio;  // [B x 1 x crop_samples]
  Tensor mel;    // [B x n_mels x crop_frames]
  std::vector<std::pair<std::size_t, std::size_t>> origins;  // (clip, first frame)
};

// Random hop-aligned crops; the audio of frame f starts at sample 200 * f.
Batch crop_batch(const Corpus& corpus, const TrainConfig& config, std::mt19937_64& rng);

// Differentiable-free analysis of a batch: [B x 1 x L] -> [B x nb x L/nb].
Tensor pqmf_analyze_batch(const PqmfBank& bank, const Tensor& audio);

struct StepLog {
  std::size_t step = 0;
  Phase phase = Phase::Pretrain;
  double lr_g = 0.0;
  double lr_d = 0.0;
  double stft = 0.0;  // STFT objective of the generator (feature matching in basic mode)
  double smoothed_stft = 0.0;
  double d_loss = 0.0;
  double g_adv = 0.0;
  double g_total = 0.0;

  // `step phase key=value ...`
  std::string to_line() const;
};

class Trainer {
 public:
  Trainer(TrainConfig config, Corpus corpus);

  // Draws a batch and runs one step of the current phase.
  StepLog step();
  // Single updates on a given batch; they advance the step counter.
  StepLog pretrain_step(const Batch& batch);
  StepLog adversarial_step(const Batch& batch);

  // The two halves of an adversarial step, without advancing the counter.
  // D is trained on detached generator output; G is trained with D frozen.
  struct GeneratorUpdate {
    double adv = 0.0;
    double aux = 0.0;
    double total = 0.0;
  };
  double update_discriminator(const Batch& batch, double lr);
  GeneratorUpdate update_generator(const Batch& batch, double lr);

  // Generator objective on a batch without updating anything.
  double evaluate_stft(const Batch& batch) const;
  Batch next_batch() { return crop_batch(corpus_, config_, rng_); }

  std::size_t current_step() const { return step_; }
  Phase phase() const;
  double smoothed_stft() const { return smoothed_; }

  const TrainConfig& config() const { return config_; }
  const Corpus& corpus() const { return corpus_; }
  Generator& generator() { return gen_; }
  const Generator& generator() const { return gen_; }
  MultiScaleDiscriminator& discriminator() { return disc_; }
  const MultiScaleDiscriminator& discriminator() const { return disc_; }
  const PqmfBank& pqmf() const { return pqmf_; }

  // Full training state (f64 tensors) and an inference-only export.
  Checkpoint state_checkpoint() const;
  Checkpoint model_checkpoint() const;
  void save(const std::string& path) const;
  // The corpus is reloaded from the paths recorded in the checkpoint unless
  // given explicitly.
  static Trainer resume(const Checkpoint& ckpt);
  static Trainer resume(const Checkpoint& ckpt, Corpus corpus);

 private:
  Tensor full_band(const Tensor& generated) const;
  Tensor stft_objective(const Batch& batch, const Tensor& generated, const Tensor& fake_full,
                        const Tensor& real_subs) const;
  void record(StepLog& log, double stft);

  TrainConfig config_;
  Corpus corpus_;
  PqmfBank pqmf_;
  Generator gen_;
  MultiScaleDiscriminator disc_;
  Adam opt_g_;
  Adam opt_d_;
  std::mt19937_64 rng_;
  std::size_t step_ = 0;
  double smoothed_ = 0.0;
  bool has_smoothed_ = false;
};

struct RunOptions {
  std::string out_dir;  // checkpoints and loss log; empty: no files
  std::function<void(const StepLog&)> on_step;
};

struct RunSummary {
  std::size_t steps = 0;
  double pretrain_start_stft = 0.0;  // smoothed value after the first step
  double pretrain_end_stft = 0.0;
  double final_stft = 0.0;
  std::vector<std::string> checkpoints;
};

// Runs until config.total_steps, writing `loss.log`, periodic checkpoints
// `ckpt_<step>.mbmg`, `final.mbmg` and an f32 `model.mbmg` into out_dir.
RunSummary run_training(Trainer& trainer, const RunOptions& options);

}  // namespace mbmelgan
