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

#include "mbmelgan/training.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mbmelgan/error.hpp"
#include "mbmelgan/ops.hpp"

namespace mbmelgan {

namespace {

std::string num(std::size_t v) { return std::to_string(v); }

// Keys that describe training progress rather than configuration.
const char* const kStateKeys[] = {"train.step",         "train.rng_state",
                                  "train.smoothed",     "train.has_smoothed",
                                  "train.adam_g_steps", "train.adam_d_steps"};

std::vector<std::string> split_paths(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

void require_finite(double v, const char* what, std::size_t step, Phase phase) {
  if (!std::isfinite(v)) {
    throw NumericError("training step " + num(step) + " (" + phase_name(phase) +
                       "): non-finite " + what + " (" + std::to_string(v) + ")");
  }
}

std::string moment_name(const char* model, const char* which, const std::string& param) {
  return std::string("adam.") + model + "." + which + "." + param;
}

void store_adam(Checkpoint& c, const char* model, const Adam& opt,
                const std::vector<NamedTensor>& params) {
  c.metadata.set(std::string("train.adam_") + model + "_steps", std::to_string(opt.step_count()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    c.add(moment_name(model, "m", params[i].first), params[i].second.shape(),
          opt.first_moments()[i]);
    c.add(moment_name(model, "v", params[i].first), params[i].second.shape(),
          opt.second_moments()[i]);
  }
}

void load_adam(const Checkpoint& c, const char* model, Adam& opt,
               const std::vector<NamedTensor>& params) {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  for (const auto& [name, t] : params) {
    m.push_back(c.tensor(moment_name(model, "m", name)).values);
    v.push_back(c.tensor(moment_name(model, "v", name)).values);
  }
  const std::size_t steps = get_size(c.metadata, std::string("train.adam_") + model + "_steps");
  opt.restore(static_cast<std::int64_t>(steps), std::move(m), std::move(v));
}

TrainConfig config_from_checkpoint(const Settings& m) {
  if (m.get_or("kind", "") != "train") {
    throw FormatError(m.source() + ": not a training checkpoint (kind=" + m.get_or("kind", "") +
                      ")");
  }
  Settings cfg(m.source());
  for (const auto& [key, entry] : m.entries()) {
    const bool state = std::find(std::begin(kStateKeys), std::end(kStateKeys), key) !=
                       std::end(kStateKeys);
    if (state || key == "kind" || key == "tensor_dtype" || key.rfind("pqmf.", 0) == 0) continue;
    cfg.set(key, entry.value);
  }
  return TrainConfig::from_settings(cfg);
}

}  // namespace

std::string phase_name(Phase phase) {
  return phase == Phase::Pretrain ? "pretrain" : "adversarial";
}

TrainConfig TrainConfig::full_scale(Variant variant) {
  TrainConfig c;
  c.generator = variant == Variant::MB   ? GeneratorSpec::mb()
                : variant == Variant::FB ? GeneratorSpec::fb()
                                         : GeneratorSpec::basic();
  c.discriminator = DiscriminatorSpec::full();
  c.loss = LossConfig::for_variant(variant);
  c.batch_size = variant == Variant::MB ? 128 : 48;
  c.lr_g = c.lr_d = 1e-4;
  c.lr_halve_every = 100000;
  c.lr_floor = 1e-6;
  c.pretrain_steps = variant == Variant::BASIC ? 0 : 200000;
  c.total_steps = 1000000;
  c.checkpoint_every = 10000;
  return c;
}

TrainConfig TrainConfig::desk(Variant variant) {
  TrainConfig c;
  c.generator = GeneratorSpec::desk(variant);
  c.discriminator = DiscriminatorSpec::desk();
  c.loss = LossConfig::for_variant(variant);
  return c;
}

std::size_t TrainConfig::crop_samples() const {
  return static_cast<std::size_t>(std::llround(crop_seconds * features.sample_rate));
}

std::size_t TrainConfig::crop_frames() const { return crop_samples() / kSamplesPerFrame; }

void TrainConfig::validate() const {
  generator.validate();
  discriminator.validate();
  loss.validate();
  if (generator.n_mels != features.n_mels) {
    throw ConfigError("train: model.n_mels (" + num(generator.n_mels) +
                      ") differs from the feature configuration (" + num(features.n_mels) + ")");
  }
  if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (!(crop_seconds > 0.0)) throw ConfigError("train: crop_seconds must be positive");
  const double exact = crop_seconds * features.sample_rate;
  if (std::abs(exact - std::round(exact)) > 1e-9 || crop_samples() % kSamplesPerFrame != 0) {
    throw ConfigError("train: crop length " + std::to_string(exact) +
                      " samples is not a multiple of " + num(kSamplesPerFrame));
  }
  if (crop_samples() < discriminator.min_audio_length()) {
    throw ConfigError("train: crop of " + num(crop_samples()) +
                      " samples is shorter than the discriminator minimum " +
                      num(discriminator.min_audio_length()));
  }
  if (!(lr_g > 0.0) || !(lr_d > 0.0)) throw ConfigError("train: learning rates must be positive");
  if (!(lr_floor > 0.0) || lr_floor > lr_g || lr_floor > lr_d) {
    throw ConfigError("train: lr_floor must be positive and not above lr_g or lr_d");
  }
  if (lr_halve_every == 0) throw ConfigError("train: lr_halve_every must be >= 1");
  if (pretrain_steps > total_steps) {
    throw ConfigError("train: pretrain_steps (" + num(pretrain_steps) + ") exceeds total_steps (" +
                      num(total_steps) + ")");
  }
  if (!(smoothing > 0.0 && smoothing <= 1.0)) {
    throw ConfigError("train: smoothing must be in (0, 1]");
  }
  if (generator.variant == Variant::MB && loss.mode != LossMode::StftMb) {
    throw ConfigError("train: the multi-band generator trains with loss.mode=stft_mb");
  }
  if (generator.variant != Variant::MB && loss.mode == LossMode::StftMb) {
    throw ConfigError("train: loss.mode=stft_mb needs model.variant=mb");
  }
}

TrainConfig TrainConfig::from_settings(const Settings& input, const std::string& base_dir) {
  Settings s = input;
  // Training files default to the desk-scale preset of the requested variant.
  if (!s.has("model.preset")) {
    s.set("model.preset", s.has("model.variant") ? "desk-" + s.get("model.variant") : "desk");
  }
  if (!s.has("disc.preset")) s.set("disc.preset", "desk");
  std::set<std::string> used{"model.preset", "disc.preset"};

  TrainConfig c;
  c.generator = load_generator_spec(s, &used);
  c.discriminator = load_discriminator_spec(s, &used);
  c.loss = load_loss_config(s, c.generator.variant, &used);
  c.features = load_mel_config(s, c.generator.n_mels, &used);

  const auto size_key = [&](const char* key, std::size_t& out) {
    if (s.has(key)) {
      out = get_size(s, key);
      used.insert(key);
    }
  };
  const auto real_key = [&](const char* key, double& out) {
    if (s.has(key)) {
      out = get_double(s, key);
      used.insert(key);
    }
  };
  size_key("train.batch_size", c.batch_size);
  real_key("train.crop_seconds", c.crop_seconds);
  if (s.has("train.lr")) {
    c.lr_g = c.lr_d = get_double(s, "train.lr");
    used.insert("train.lr");
  }
  real_key("train.lr_g", c.lr_g);
  real_key("train.lr_d", c.lr_d);
  size_key("train.lr_halve_every", c.lr_halve_every);
  real_key("train.lr_floor", c.lr_floor);
  size_key("train.pretrain_steps", c.pretrain_steps);
  size_key("train.total_steps", c.total_steps);
  std::size_t seed = c.seed;
  size_key("train.seed", seed);
  c.seed = seed;
  real_key("train.smoothing", c.smoothing);
  size_key("train.checkpoint_every", c.checkpoint_every);
  real_key("train.adam_beta1", c.adam.beta1);
  real_key("train.adam_beta2", c.adam.beta2);
  real_key("train.adam_epsilon", c.adam.epsilon);
  if (s.has("data.wav")) {
    used.insert("data.wav");
    for (const auto& p : split_paths(s.get("data.wav"))) {
      const std::filesystem::path path(p);
      c.wav_paths.push_back(path.is_absolute() || base_dir.empty()
                                ? p
                                : (std::filesystem::path(base_dir) / path).lexically_normal().string());
    }
  }
  for (const auto& [key, entry] : s.entries()) {
    if (!used.count(key)) throw ConfigError(s.where(key) + ": unknown key '" + key + "'");
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(s.source() + ": " + e.what());
  }
  return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path().string();
  return from_settings(Settings::load_file(path), parent);
}

void TrainConfig::store(Settings& s) const {
  store_generator_spec(s, generator);
  store_discriminator_spec(s, discriminator);
  store_loss_config(s, loss);
  store_mel_config(s, features);
  s.set("train.batch_size", num(batch_size));
  s.set("train.crop_seconds", format_double(crop_seconds));
  s.set("train.lr_g", format_double(lr_g));
  s.set("train.lr_d", format_double(lr_d));
  s.set("train.lr_halve_every", num(lr_halve_every));
  s.set("train.lr_floor", format_double(lr_floor));
  s.set("train.pretrain_steps", num(pretrain_steps));
  s.set("train.total_steps", num(total_steps));
  s.set("train.seed", std::to_string(seed));
  s.set("train.smoothing", format_double(smoothing));
  s.set("train.checkpoint_every", num(checkpoint_every));
  s.set("train.adam_beta1", format_double(adam.beta1));
  s.set("train.adam_beta2", format_double(adam.beta2));
  s.set("train.adam_epsilon", format_double(adam.epsilon));
  std::string paths;
  for (std::size_t i = 0; i < wav_paths.size(); ++i) paths += (i ? "," : "") + wav_paths[i];
  if (!paths.empty()) s.set("data.wav", paths);
}

double lr_at(std::size_t step, double lr0, std::size_t halve_every, double floor) {
  if (halve_every == 0) throw ConfigError("lr_at: halve_every must be >= 1");
  const std::size_t halvings = step / halve_every;
  const double lr = halvings >= 2000 ? 0.0 : lr0 * std::ldexp(1.0, -static_cast<int>(halvings));
  return std::max(lr, floor);
}

double lr_at(std::size_t step, const TrainConfig& config) {
  return lr_at(step, config.lr_g, config.lr_halve_every, config.lr_floor);
}

Corpus Corpus::from_audio(std::vector<std::pair<std::string, AudioBuffer>> clips,
                          const MelConfig& features, std::size_t min_samples,
                          const FeatureStats* stats, const Warn& warn) {
  Corpus c;
  std::vector<MelSpectrogram> raw;
  for (auto& [name, audio] : clips) {
    if (audio.samples.size() < min_samples) {
      const std::string msg = "skipping '" + name + "': " + num(audio.samples.size()) +
                              " samples, crops need " + num(min_samples);
      if (warn) {
        warn(msg);
      } else {
        std::cerr << "warning: " << msg << "\n";
      }
      continue;
    }
    raw.push_back(mel_spectrogram(audio, features));
    c.clips_.push_back({name, std::move(audio), {}});
  }
  if (c.clips_.empty()) {
    throw ConfigError("corpus: no clip is long enough for a " + num(min_samples) +
                      "-sample crop");
  }
  c.stats_ = stats ? *stats : fit_stats(raw);
  for (std::size_t i = 0; i < raw.size(); ++i) c.clips_[i].mel = normalize(raw[i], c.stats_);
  return c;
}

Corpus Corpus::from_wavs(const std::vector<std::string>& paths, const MelConfig& features,
                         std::size_t min_samples, const FeatureStats* stats, const Warn& warn) {
  if (paths.empty()) throw ConfigError("corpus: no wav files given (set data.wav)");
  std::vector<std::pair<std::string, AudioBuffer>> clips;
  for (const auto& p : paths) clips.emplace_back(p, wav_read(p));
  return from_audio(std::move(clips), features, min_samples, stats, warn);
}

Batch crop_batch(const Corpus& corpus, const TrainConfig& config, std::mt19937_64& rng) {
  const std::size_t b = config.batch_size;
  const std::size_t len = config.crop_samples();
  const std::size_t frames = config.crop_frames();
  const std::size_t n_mels = config.features.n_mels;
  std::vector<double> audio(b * len);
  std::vector<double> mel(b * n_mels * frames);
  Batch batch;
  std::uniform_int_distribution<std::size_t> pick(0, corpus.clips().size() - 1);
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t ci = pick(rng);
    const TrainingClip& clip = corpus.clips()[ci];
    const std::size_t max_start = (clip.audio.samples.size() - len) / kSamplesPerFrame;
    std::uniform_int_distribution<std::size_t> start_dist(0, max_start);
    const std::size_t start = start_dist(rng);
    std::copy_n(clip.audio.samples.begin() + static_cast<std::ptrdiff_t>(start * kSamplesPerFrame),
                len, audio.begin() + static_cast<std::ptrdiff_t>(i * len));
    for (std::size_t m = 0; m < n_mels; ++m)
      for (std::size_t f = 0; f < frames; ++f)
        mel[(i * n_mels + m) * frames + f] = clip.mel.at(start + f, m);
    batch.origins.emplace_back(ci, start);
  }
  batch.audio = Tensor({b, 1, len}, std::move(audio));
  batch.mel = Tensor({b, n_mels, frames}, std::move(mel));
  return batch;
}

Tensor pqmf_analyze_batch(const PqmfBank& bank, const Tensor& audio) {
  if (audio.rank() != 3 || audio.size(1) != 1) {
    throw ShapeError("pqmf_analyze_batch: expected [B x 1 x L], got " + shape_str(audio.shape()));
  }
  const std::size_t b = audio.size(0);
  const std::size_t len = audio.size(2);
  const std::size_t nb = bank.num_bands;
  const std::size_t t = (len + nb - 1) / nb;
  std::vector<double> out(b * nb * t);
  for (std::size_t i = 0; i < b; ++i) {
    const auto bands = analyze(bank, audio.data().subspan(i * len, len));
    for (std::size_t k = 0; k < nb; ++k)
      std::copy(bands[k].begin(), bands[k].end(), out.begin() + static_cast<std::ptrdiff_t>((i * nb + k) * t));
  }
  return Tensor({b, nb, t}, std::move(out));
}

std::string StepLog::to_line() const {
  char buf[320];
  if (phase == Phase::Pretrain) {
    std::snprintf(buf, sizeof buf, "%zu pretrain lr_g=%.6g stft=%.6f smoothed_stft=%.6f", step,
                  lr_g, stft, smoothed_stft);
  } else {
    std::snprintf(buf, sizeof buf,
                  "%zu adversarial lr_g=%.6g lr_d=%.6g d_loss=%.6f g_adv=%.6f aux=%.6f "
                  "g_total=%.6f smoothed_stft=%.6f",
                  step, lr_g, lr_d, d_loss, g_adv, stft, g_total, smoothed_stft);
  }
  return buf;
}

Trainer::Trainer(TrainConfig config, Corpus corpus)
    : config_(std::move(config)), corpus_(std::move(corpus)), rng_(config_.seed) {
  config_.validate();
  if (config_.generator.variant == Variant::MB) {
    PqmfDesignOptions o;
    o.num_bands = config_.generator.out_channels;
    pqmf_ = design_pqmf(o);
  }
  // Separate streams so that changing one model leaves the other's init alone.
  gen_ = Generator(config_.generator, config_.seed * 2 + 1);
  disc_ = MultiScaleDiscriminator(config_.discriminator, config_.seed * 2 + 2);
  opt_g_ = Adam(gen_.parameters(), config_.adam);
  opt_d_ = Adam(disc_.parameters(), config_.adam);
}

Phase Trainer::phase() const {
  return step_ < config_.pretrain_steps ? Phase::Pretrain : Phase::Adversarial;
}

Tensor Trainer::full_band(const Tensor& generated) const {
  if (config_.generator.variant != Variant::MB) return generated;
  return pqmf_synthesize(pqmf_, generated, pqmf_.delay());
}

Tensor Trainer::stft_objective(const Batch& batch, const Tensor& generated,
                               const Tensor& fake_full, const Tensor& real_subs) const {
  if (config_.loss.mode == LossMode::StftMb) {
    return combined_mb_stft_loss(batch.audio, fake_full, real_subs, generated, config_.loss,
                                 pqmf_.num_bands);
  }
  return multi_res_stft_loss(batch.audio, fake_full, config_.loss.full_band_resolutions);
}

void Trainer::record(StepLog& log, double stft) {
  log.stft = stft;
  if (!has_smoothed_) {
    smoothed_ = stft;
    has_smoothed_ = true;
  } else {
    smoothed_ = (1.0 - config_.smoothing) * smoothed_ + config_.smoothing * stft;
  }
  log.smoothed_stft = smoothed_;
}

StepLog Trainer::step() {
  const Batch batch = next_batch();
  return phase() == Phase::Pretrain ? pretrain_step(batch) : adversarial_step(batch);
}

StepLog Trainer::pretrain_step(const Batch& batch) {
  StepLog log;
  log.step = step_;
  log.phase = Phase::Pretrain;
  log.lr_g = lr_at(step_, config_.lr_g, config_.lr_halve_every, config_.lr_floor);
  const Tensor real_subs = config_.generator.variant == Variant::MB
                               ? pqmf_analyze_batch(pqmf_, batch.audio)
                               : Tensor();
  opt_g_.zero_grad();
  const Tensor generated = gen_.forward(batch.mel);
  const Tensor loss = stft_objective(batch, generated, full_band(generated), real_subs);
  require_finite(loss.item(), "STFT loss", step_, log.phase);
  backward(loss);
  opt_g_.step(log.lr_g);
  record(log, loss.item());
  ++step_;
  return log;
}

double Trainer::update_discriminator(const Batch& batch, double lr) {
  // The generator output is detached: no graph reaches G's parameters.
  Tensor fake_audio;
  {
    NoGradGuard guard;
    fake_audio = full_band(gen_.forward(batch.mel));
  }
  disc_.set_requires_grad(true);
  opt_d_.zero_grad();
  const Tensor ld = d_loss(scores_of(disc_.forward(batch.audio)),
                           scores_of(disc_.forward(fake_audio)));
  require_finite(ld.item(), "discriminator loss", step_, Phase::Adversarial);
  backward(ld);
  opt_d_.step(lr);
  return ld.item();
}

Trainer::GeneratorUpdate Trainer::update_generator(const Batch& batch, double lr) {
  disc_.set_requires_grad(false);
  opt_g_.zero_grad();
  const Tensor generated = gen_.forward(batch.mel);
  const Tensor fake_full = full_band(generated);
  const auto fake_out = disc_.forward(fake_full);
  const Tensor adv = g_adv_loss(scores_of(fake_out));
  Tensor aux;
  if (config_.loss.mode == LossMode::FeatureMatching) {
    std::vector<MultiScaleDiscriminator::ScaleOutput> real_out;
    {
      NoGradGuard guard;
      real_out = disc_.forward(batch.audio);
    }
    aux = feature_matching_loss(features_of(real_out), features_of(fake_out));
  } else {
    const Tensor real_subs = config_.generator.variant == Variant::MB
                                 ? pqmf_analyze_batch(pqmf_, batch.audio)
                                 : Tensor();
    aux = stft_objective(batch, generated, fake_full, real_subs);
  }
  const Tensor total = g_total_loss(config_.loss, adv, aux);
  if (!std::isfinite(total.item())) disc_.set_requires_grad(true);
  require_finite(total.item(), "generator loss", step_, Phase::Adversarial);
  backward(total);
  opt_g_.step(lr);
  disc_.set_requires_grad(true);
  return {adv.item(), aux.item(), total.item()};
}

StepLog Trainer::adversarial_step(const Batch& batch) {
  StepLog log;
  log.step = step_;
  log.phase = Phase::Adversarial;
  log.lr_g = lr_at(step_, config_.lr_g, config_.lr_halve_every, config_.lr_floor);
  log.lr_d = lr_at(step_, config_.lr_d, config_.lr_halve_every, config_.lr_floor);
  log.d_loss = update_discriminator(batch, log.lr_d);
  const GeneratorUpdate g = update_generator(batch, log.lr_g);
  log.g_adv = g.adv;
  log.g_total = g.total;
  record(log, g.aux);
  ++step_;
  return log;
}

double Trainer::evaluate_stft(const Batch& batch) const {
  NoGradGuard guard;
  const Tensor generated = gen_.forward(batch.mel);
  const Tensor real_subs = config_.generator.variant == Variant::MB
                               ? pqmf_analyze_batch(pqmf_, batch.audio)
                               : Tensor();
  return stft_objective(batch, generated, full_band(generated), real_subs).item();
}

Checkpoint Trainer::state_checkpoint() const {
  Checkpoint c = make_model_checkpoint(gen_, config_.features, &corpus_.stats(),
                                       config_.generator.variant == Variant::MB ? &pqmf_ : nullptr,
                                       step_);
  c.metadata.set("kind", "train");
  config_.store(c.metadata);
  std::ostringstream rng;
  rng << rng_;
  c.metadata.set("train.rng_state", rng.str());
  c.metadata.set("train.smoothed", format_double(smoothed_));
  c.metadata.set("train.has_smoothed", has_smoothed_ ? "1" : "0");
  store_parameters(c, disc_.named_parameters());
  store_adam(c, "g", opt_g_, gen_.named_parameters());
  store_adam(c, "d", opt_d_, disc_.named_parameters());
  return c;
}

Checkpoint Trainer::model_checkpoint() const {
  return make_model_checkpoint(gen_, config_.features, &corpus_.stats(),
                               config_.generator.variant == Variant::MB ? &pqmf_ : nullptr,
                               step_);
}

void Trainer::save(const std::string& path) const {
  write_checkpoint(path, state_checkpoint(), TensorDtype::F64);
}

Trainer Trainer::resume(const Checkpoint& ckpt) {
  const TrainConfig config = config_from_checkpoint(ckpt.metadata);
  const FeatureStats stats{ckpt.tensor("stats.mean").values, ckpt.tensor("stats.stddev").values};
  return resume(ckpt, Corpus::from_wavs(config.wav_paths, config.features, config.crop_samples(),
                                        &stats));
}

Trainer Trainer::resume(const Checkpoint& ckpt, Corpus corpus) {
  const Settings& m = ckpt.metadata;
  Trainer t(config_from_checkpoint(m), std::move(corpus));
  if (has_pqmf(m)) t.pqmf_ = load_pqmf(m);
  load_parameters(ckpt, t.gen_.named_parameters());
  load_parameters(ckpt, t.disc_.named_parameters());
  load_adam(ckpt, "g", t.opt_g_, t.gen_.named_parameters());
  load_adam(ckpt, "d", t.opt_d_, t.disc_.named_parameters());
  t.step_ = get_size(m, "train.step");
  std::istringstream rng(m.get("train.rng_state"));
  rng >> t.rng_;
  if (!rng) throw FormatError(m.source() + ": malformed train.rng_state");
  t.smoothed_ = get_double(m, "train.smoothed");
  t.has_smoothed_ = m.get("train.has_smoothed") == "1";
  return t;
}

RunSummary run_training(Trainer& trainer, const RunOptions& options) {
  namespace fs = std::filesystem;
  const TrainConfig& cfg = trainer.config();
  RunSummary summary;
  summary.pretrain_start_stft = std::nan("");
  summary.pretrain_end_stft = std::nan("");
  std::ofstream log_file;
  if (!options.out_dir.empty()) {
    fs::create_directories(options.out_dir);
    log_file.open(fs::path(options.out_dir) / "loss.log", std::ios::app);
    if (!log_file) throw FormatError("cannot open loss log in '" + options.out_dir + "'");
  }
  const auto save = [&](const std::string& file) {
    const std::string path = (fs::path(options.out_dir) / file).string();
    trainer.save(path);
    summary.checkpoints.push_back(path);
  };
  while (trainer.current_step() < cfg.total_steps) {
    const StepLog log = trainer.step();
    ++summary.steps;
    if (log.step == 0) summary.pretrain_start_stft = log.smoothed_stft;
    if (log.phase == Phase::Pretrain && log.step + 1 == cfg.pretrain_steps) {
      summary.pretrain_end_stft = log.smoothed_stft;
    }
    summary.final_stft = log.smoothed_stft;
    if (log_file) log_file << log.to_line() << "\n" << std::flush;
    if (options.on_step) options.on_step(log);
    if (!options.out_dir.empty() && cfg.checkpoint_every > 0 &&
        trainer.current_step() % cfg.checkpoint_every == 0 &&
        trainer.current_step() < cfg.total_steps) {
      save("ckpt_" + num(trainer.current_step()) + ".mbmg");
    }
  }
  if (!options.out_dir.empty()) {
    save("final.mbmg");
    const std::string model = (fs::path(options.out_dir) / "model.mbmg").string();
    write_checkpoint(model, trainer.model_checkpoint(), TensorDtype::F32);
    summary.checkpoints.push_back(model);
  }
  return summary;
}

}  // namespace mbmelgan
