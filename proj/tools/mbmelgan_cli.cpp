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

// Command-line front end: synthesis, benchmarking, complexity reports, PQMF
// checks, feature extraction and training.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mbmelgan/checkpoint.hpp"
#include "mbmelgan/config.hpp"
#include "mbmelgan/dsp.hpp"
#include "mbmelgan/error.hpp"
#include "mbmelgan/inference.hpp"
#include "mbmelgan/models.hpp"
#include "mbmelgan/pqmf.hpp"
#include "mbmelgan/signals.hpp"
#include "mbmelgan/training.hpp"

namespace fs = std::filesystem;
using namespace mbmelgan;

namespace {

struct SynthArgs {
  std::string checkpoint;
  std::string mel;
  std::string wav;
  std::string out;
  std::size_t chunk_frames = 0;
  std::size_t threads = 1;
};

int run_synth(const SynthArgs& a) {
  const ModelBundle bundle = load_model(read_checkpoint(a.checkpoint));
  const Vocoder vocoder(bundle);
  MelSpectrogram raw;
  if (!a.mel.empty()) {
    MelFile file = read_mel_file(a.mel);
    if (!(file.config == bundle.features)) {
      throw ConfigError(a.mel + ": feature configuration differs from the checkpoint's");
    }
    raw = std::move(file.mel);
  } else {
    const AudioBuffer audio = wav_read(a.wav);
    if (audio.sample_rate != bundle.features.sample_rate) {
      throw ConfigError(a.wav + ": sample rate " + std::to_string(audio.sample_rate) +
                        " differs from the checkpoint's " +
                        std::to_string(bundle.features.sample_rate));
    }
    raw = mel_spectrogram(audio, bundle.features);
  }
  if (raw.frames == 0) throw ShapeError("synth: input has no mel frames");
  AudioBuffer out;
  out.sample_rate = bundle.features.sample_rate;
  out.samples = vocoder.synthesize(raw, a.chunk_frames, a.threads);
  wav_write(a.out, out);
  std::cout << "frames=" << raw.frames << "\nsamples=" << out.samples.size() << "\n";
  return 0;
}

// Random-weight model for a preset; enough for timing and length checks.
ModelBundle preset_bundle(const std::string& preset, std::uint64_t seed) {
  const GeneratorSpec spec = GeneratorSpec::preset(preset);
  std::optional<PqmfBank> pqmf;
  if (spec.variant == Variant::MB) pqmf = design_pqmf();
  return ModelBundle{spec, MelConfig{}, std::nullopt, pqmf, Generator(spec, seed), "model", 0};
}

struct BenchArgs {
  std::string checkpoint;
  std::string preset;
  BenchOptions options;
};

int run_bench(const BenchArgs& a) {
  const ModelBundle bundle = a.checkpoint.empty() ? preset_bundle(a.preset, 1)
                                                  : load_model(read_checkpoint(a.checkpoint));
  const Vocoder vocoder(bundle);
  const BenchReport report = bench(vocoder, a.options);
  std::cout << "variant=" << variant_name(bundle.spec.variant) << "\n" << report.to_text();
  return 0;
}

int run_count(const std::string& variant, const std::string& residual, bool discriminator) {
  GeneratorSpec spec = GeneratorSpec::preset(variant);
  if (!residual.empty()) spec.residual = parse_residual(residual);
  const ModelStats stats = model_stats(spec);
  std::printf("variant=%s\n", variant_name(spec.variant).c_str());
  std::printf("residual=%s\n", residual_name(spec.residual).c_str());
  std::printf("parameters=%zu\n", stats.parameter_count);
  std::printf("parameters_millions=%.3f\n", static_cast<double>(stats.parameter_count) / 1e6);
  std::printf("gflops_per_second=%.3f\n", stats.flops_per_second_of_audio / 1e9);
  std::printf("receptive_field=%zu\n", stats.receptive_field_samples);
  std::printf("context_frames=%zu\n", stats.context_frames);
  if (discriminator) {
    std::printf("discriminator_parameters=%zu\n", count_params(DiscriminatorSpec::full()));
  }
  return 0;
}

int run_pqmf_verify(const PqmfDesignOptions& options) {
  const PqmfBank bank = design_pqmf(options);
  const std::size_t n = 16000;
  const double noise = round_trip_snr_db(bank, signals::white_noise(n, 1));
  const double speech = round_trip_snr_db(bank, signals::speech_like(n));
  const double sweep = round_trip_snr_db(bank, signals::chirp(n));
  const double impulse = impulse_reconstruction_snr_db(bank);
  const double stop = stopband_attenuation_db(bank);
  const double worst = std::min({noise, speech, sweep, impulse});
  std::printf("bands=%zu\ntaps=%zu\nkaiser_beta=%.6g\ncutoff_ratio=%.6f\n", bank.num_bands,
              bank.taps, bank.kaiser_beta, bank.cutoff_ratio);
  std::printf("delay=%zu\n", bank.delay());
  std::printf("snr_impulse_db=%.2f\nsnr_noise_db=%.2f\nsnr_speech_db=%.2f\nsnr_chirp_db=%.2f\n",
              impulse, noise, speech, sweep);
  std::printf("stopband_db=%.2f\n", stop);
  const bool ok = worst >= options.min_snr_db;
  std::printf("status=%s\n", ok ? "ok" : "below_threshold");
  return ok ? 0 : 1;
}

int run_features(const std::string& wav, const std::string& out, const std::string& checkpoint) {
  MelConfig config;
  if (!checkpoint.empty()) config = load_model(read_checkpoint(checkpoint)).features;
  const AudioBuffer audio = wav_read(wav);
  if (audio.sample_rate != config.sample_rate) {
    throw ConfigError(wav + ": sample rate " + std::to_string(audio.sample_rate) +
                      " differs from the feature configuration's " +
                      std::to_string(config.sample_rate));
  }
  const MelSpectrogram mel = mel_spectrogram(audio, config);
  write_mel_file(out, mel, config);
  std::cout << "frames=" << mel.frames << "\nn_mels=" << mel.n_mels << "\n";
  return 0;
}

int run_train(const std::string& config_path, const std::string& out_dir,
              const std::string& resume, bool quiet) {
  Trainer trainer = [&] {
    if (!resume.empty()) return Trainer::resume(read_checkpoint(resume));
    const TrainConfig config = TrainConfig::load(config_path);
    const auto warn = [](const std::string& m) { std::cerr << "warning: " << m << "\n"; };
    Corpus corpus = Corpus::from_wavs(config.wav_paths, config.features, config.crop_samples(),
                                      nullptr, warn);
    return Trainer(config, std::move(corpus));
  }();
  RunOptions options;
  options.out_dir = out_dir;
  if (!quiet) options.on_step = [](const StepLog& log) { std::cout << log.to_line() << "\n"; };
  const RunSummary summary = run_training(trainer, options);
  std::printf("steps=%zu\npretrain_start_stft=%.6f\npretrain_end_stft=%.6f\nfinal_stft=%.6f\n",
              summary.steps, summary.pretrain_start_stft, summary.pretrain_end_stft,
              summary.final_stft);
  for (const auto& path : summary.checkpoints) std::printf("checkpoint=%s\n", path.c_str());
  return 0;
}

int run_init(const std::string& preset, const std::string& out, std::uint64_t seed) {
  const ModelBundle b = preset_bundle(preset, seed);
  write_checkpoint(out, make_model_checkpoint(b.generator, b.features, nullptr,
                                              b.pqmf ? &*b.pqmf : nullptr),
                   TensorDtype::F32);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-band MelGAN vocoder"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize a waveform from a mel file or WAV");
  synth_cmd->add_option("--checkpoint", synth.checkpoint, "Model or training checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  auto* mel_opt = synth_cmd->add_option("--mel", synth.mel, "Mel feature file")
                      ->check(CLI::ExistingFile);
  auto* wav_opt = synth_cmd->add_option("--wav", synth.wav, "WAV for copy synthesis")
                      ->check(CLI::ExistingFile);
  mel_opt->excludes(wav_opt);
  synth_cmd->add_option("--out", synth.out, "Output 16-bit WAV")->required();
  synth_cmd->add_option("--chunk-frames", synth.chunk_frames, "Frames per chunk, 0 for whole input");
  synth_cmd->add_option("--threads", synth.threads, "Worker threads over chunks")
      ->check(CLI::PositiveNumber);

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Measure the real-time factor");
  auto* bench_ckpt = bench_cmd->add_option("--checkpoint", bench_args.checkpoint)
                         ->check(CLI::ExistingFile);
  auto* bench_preset = bench_cmd->add_option("--preset", bench_args.preset,
                                             "Random-weight model: mb, fb, basic, desk-mb, ...");
  bench_ckpt->excludes(bench_preset);
  bench_cmd->add_option("--seconds", bench_args.options.seconds)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--threads", bench_args.options.threads)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--warmup", bench_args.options.warmup);
  bench_cmd->add_option("--iterations", bench_args.options.iterations)
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_args.options.seed);

  std::string count_variant;
  std::string count_residual;
  bool count_disc = false;
  auto* count_cmd = app.add_subcommand("count", "Parameter count, GFLOPS and receptive field");
  count_cmd->add_option("--variant", count_variant, "mb, fb, basic or another preset")
      ->required();
  count_cmd->add_option("--residual", count_residual, "shortcut or identity");
  count_cmd->add_flag("--discriminator", count_disc, "Also count the discriminator");

  PqmfDesignOptions pqmf_options;
  auto* pqmf_cmd = app.add_subcommand("pqmf-verify", "Design a PQMF bank and check reconstruction");
  pqmf_cmd->add_option("--taps", pqmf_options.taps);
  pqmf_cmd->add_option("--bands", pqmf_options.num_bands);
  pqmf_cmd->add_option("--beta", pqmf_options.kaiser_beta);
  pqmf_cmd->add_option("--min-snr", pqmf_options.min_snr_db);

  std::string feat_wav;
  std::string feat_out;
  std::string feat_ckpt;
  auto* feat_cmd = app.add_subcommand("features", "Extract a log-mel feature file");
  feat_cmd->add_option("--wav", feat_wav)->required()->check(CLI::ExistingFile);
  feat_cmd->add_option("--out", feat_out)->required();
  feat_cmd->add_option("--checkpoint", feat_ckpt, "Take the feature configuration from here")
      ->check(CLI::ExistingFile);

  std::string train_config;
  std::string train_out = "run";
  std::string train_resume;
  bool train_quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Train a generator and discriminator");
  auto* cfg_opt = train_cmd->add_option("--config", train_config)->check(CLI::ExistingFile);
  auto* resume_opt = train_cmd->add_option("--resume", train_resume, "Training checkpoint")
                         ->check(CLI::ExistingFile);
  cfg_opt->excludes(resume_opt);
  train_cmd->add_option("--out", train_out, "Output directory");
  train_cmd->add_flag("--quiet", train_quiet);

  std::string init_preset;
  std::string init_out;
  std::uint64_t init_seed = 1;
  auto* init_cmd = app.add_subcommand("init", "Write a randomly initialized model checkpoint");
  init_cmd->add_option("--preset", init_preset)->required();
  init_cmd->add_option("--out", init_out)->required();
  init_cmd->add_option("--seed", init_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      if (synth.mel.empty() && synth.wav.empty()) throw ConfigError("synth: give --mel or --wav");
      return run_synth(synth);
    }
    if (*bench_cmd) {
      if (bench_args.checkpoint.empty() && bench_args.preset.empty()) {
        throw ConfigError("bench: give --checkpoint or --preset");
      }
      return run_bench(bench_args);
    }
    if (*count_cmd) return run_count(count_variant, count_residual, count_disc);
    if (*pqmf_cmd) return run_pqmf_verify(pqmf_options);
    if (*feat_cmd) return run_features(feat_wav, feat_out, feat_ckpt);
    if (*train_cmd) {
      if (train_config.empty() && train_resume.empty()) {
        throw ConfigError("train: give --config or --resume");
      }
      fs::create_directories(train_out);
      return run_train(train_config, train_out, train_resume, train_quiet);
    }
    if (*init_cmd) return run_init(init_preset, init_out, init_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
