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

// Acceptance runner: one PASS/FAIL line per criterion. Arguments select a
// subset (e.g. `acceptance AC1 AC3`); with none, all criteria run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "gradcases.hpp"
#include "losscases.hpp"
#include "mbmelgan/checkpoint.hpp"
#include "mbmelgan/inference.hpp"
#include "mbmelgan/models.hpp"
#include "mbmelgan/pqmf.hpp"
#include "mbmelgan/signals.hpp"
#include "mbmelgan/training.hpp"

using namespace mbmelgan;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t a = receptive_field({1, 3, 9, 27}, 3);
  const std::size_t b = receptive_field({1, 3, 9}, 3);
  const double ms = seconds_since(t0) * 1e3;
  return {a == 81 && b == 27 && ms < 1.0,
          fmt("rf(1,3,9,27)=%zu rf(1,3,9)=%zu time=%.4fms", a, b, ms)};
}

Outcome ac2() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Row {
    const char* name;
    double params_m;
    double gflops;
  };
  bool ok = true;
  std::string detail;
  double mb_flops = 0.0, fb_flops = 0.0;
  for (const Row r : {Row{"mb", 1.91, 0.95}, Row{"fb", 4.87, 7.60}, Row{"basic", 4.27, 5.85}}) {
    const ModelStats s = model_stats(GeneratorSpec::preset(r.name));
    const double p = static_cast<double>(s.parameter_count) / 1e6;
    const double g = s.flops_per_second_of_audio / 1e9;
    const double dp = p / r.params_m - 1.0, dg = g / r.gflops - 1.0;
    ok = ok && std::abs(dp) <= 0.15 && std::abs(dg) <= 0.20;
    detail += fmt("%s=%.3fM(%+.1f%%),%.3fGFLOPS(%+.1f%%) ", r.name, p, 100 * dp, g, 100 * dg);
    if (std::string(r.name) == "mb") mb_flops = g;
    if (std::string(r.name) == "fb") fb_flops = g;
  }
  const double ratio = fb_flops / mb_flops;
  const double secs = seconds_since(t0);
  ok = ok && ratio >= 6.0 && secs < 1.0;
  return {ok, detail + fmt("MB:FB=1:%.2f time=%.3fs", ratio, secs)};
}

Outcome ac3() {
  const auto t0 = std::chrono::steady_clock::now();
  const PqmfBank bank = design_pqmf();
  const double noise = round_trip_snr_db(bank, signals::white_noise(16000, 1));
  const double speech = round_trip_snr_db(bank, signals::speech_like(16000));
  const double chirp = round_trip_snr_db(bank, signals::chirp(16000));
  const double stop = stopband_attenuation_db(bank);
  const double secs = seconds_since(t0);
  const bool ok = noise >= 36 && speech >= 36 && chirp >= 36 && stop >= 60 && bank.delay() == 63 &&
                  secs < 10;
  return {ok, fmt("snr noise=%.2fdB speech=%.2fdB chirp=%.2fdB stopband=%.2fdB delay=%zu "
                  "time=%.2fs",
                  noise, speech, chirp, stop, bank.delay(), secs)};
}

Outcome ac4() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::size_t cases = 0;
  const auto note = [&](const std::string& name, double err) {
    ++cases;
    if (err > worst) {
      worst = err;
      worst_name = name;
    }
  };
  for (const auto& c : gradcases::op_cases())
    for (std::uint64_t seed = 1; seed <= 5; ++seed) note(c.name, c.run(seed).max_relative_error);
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    note("tiny_mb_generator", gradcases::tiny_generator_case(seed).max_relative_error);
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 120,
          fmt("cases=%zu max_rel_err=%.3g (%s) time=%.1fs", cases, worst, worst_name.c_str(),
              secs)};
}

Outcome ac5() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::size_t checks = 0;
  for (const auto& [seed, len] : std::vector<std::pair<std::uint64_t, std::size_t>>{
           {1, 512}, {2, 1600}, {3, 3000}, {4, 4096}, {5, 4096}}) {
    for (const auto& o : losscases::run(seed, len)) {
      ++checks;
      if (o.relative_error > worst) {
        worst = o.relative_error;
        worst_name = o.name;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 60,
          fmt("checks=%zu max_rel_err=%.3g (%s) time=%.1fs", checks, worst,
              worst_name.empty() ? "-" : worst_name.c_str(), secs)};
}

Outcome ac6() {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainConfig config = TrainConfig::desk(Variant::MB);
  AudioBuffer clip;
  clip.samples = signals::speech_like(16000, 7);
  Corpus corpus = Corpus::from_audio({{"clip", clip}}, config.features, config.crop_samples());
  Trainer trainer(config, std::move(corpus));
  bool finite = true;
  RunOptions options;
  options.on_step = [&](const StepLog& log) {
    for (double v : {log.stft, log.d_loss, log.g_adv, log.g_total})
      finite = finite && std::isfinite(v);
    if (log.step % 100 == 99) {
      std::fprintf(stderr, "  step %zu %s smoothed_stft=%.4f\n", log.step,
                   phase_name(log.phase).c_str(), log.smoothed_stft);
    }
  };
  RunSummary s;
  try {
    s = run_training(trainer, options);
  } catch (const std::exception& e) {
    return {false, fmt("training aborted: %s", e.what())};
  }
  const double drop = 1.0 - s.pretrain_end_stft / s.pretrain_start_stft;
  const double rise = s.final_stft / s.pretrain_end_stft - 1.0;
  const double secs = seconds_since(t0);
  const bool ok = finite && drop >= 0.80 && rise <= 0.10 && secs < 900;
  return {ok, fmt("steps=%zu+%zu smoothed_stft start=%.4f pretrain_end=%.4f (drop %.1f%%) "
                  "final=%.4f (%+.1f%%) finite=%s time=%.0fs",
                  config.pretrain_steps, config.total_steps - config.pretrain_steps,
                  s.pretrain_start_stft, s.pretrain_end_stft, 100 * drop, s.final_stft,
                  100 * rise, finite ? "yes" : "no", secs)};
}

Outcome ac7() {
  bool ok = true;
  std::string detail = "lengths";
  const PqmfBank bank = design_pqmf();
  for (const char* preset : {"desk-mb", "mb"}) {
    const GeneratorSpec spec = GeneratorSpec::preset(preset);
    const Vocoder v(ModelBundle{spec, MelConfig{}, std::nullopt, bank, Generator(spec, 1),
                                "model", 0});
    for (std::size_t t : {1u, 7u, 80u}) {
      MelSpectrogram mel;
      mel.frames = t;
      mel.n_mels = 80;
      mel.values.assign(t * 80, 0.3);
      const std::size_t n = v.synthesize(mel).size();
      ok = ok && n == 200 * t;
      detail += fmt(" %s/T=%zu:%zu", preset, t, n);
    }
  }

  // Two independent runs from the same seed.
  TrainConfig config = TrainConfig::desk(Variant::MB);
  config.batch_size = 2;
  config.crop_seconds = 0.5;
  config.pretrain_steps = 2;
  config.total_steps = 4;
  AudioBuffer clip;
  clip.samples = signals::speech_like(16000, 3);
  std::vector<std::vector<std::uint8_t>> ckpts;
  std::vector<std::vector<double>> outputs;
  for (int run = 0; run < 2; ++run) {
    Trainer t(config, Corpus::from_audio({{"clip", clip}}, config.features, config.crop_samples()));
    for (std::size_t i = 0; i < config.total_steps; ++i) t.step();
    ckpts.push_back(encode_checkpoint(t.state_checkpoint(), TensorDtype::F64));
    const ModelBundle b = load_model(t.model_checkpoint());
    outputs.push_back(Vocoder(b).synthesize(t.corpus().clips()[0].mel));
  }
  const bool same_ckpt = ckpts[0] == ckpts[1];
  const bool same_out = outputs[0] == outputs[1];
  ok = ok && same_ckpt && same_out;
  detail += fmt(" checkpoints_identical=%s outputs_identical=%s", same_ckpt ? "yes" : "no",
                same_out ? "yes" : "no");
  return {ok, detail};
}

Outcome ac8() {
  const auto t0 = std::chrono::steady_clock::now();
  BenchOptions o;
  o.seconds = 2.0;
  o.threads = 1;
  o.warmup = 1;
  o.iterations = 3;
  const auto rtf = [&](const char* preset) {
    const GeneratorSpec spec = GeneratorSpec::preset(preset);
    std::optional<PqmfBank> bank;
    if (spec.variant == Variant::MB) bank = design_pqmf();
    const Vocoder v(ModelBundle{spec, MelConfig{}, std::nullopt, bank, Generator(spec, 1),
                                "model", 0});
    return bench(v, o).rtf;
  };
  const double mb = rtf("mb");
  const double fb = rtf("fb");
  const double secs = seconds_since(t0);
  return {mb < fb / 4.0 && secs < 300,
          fmt("rtf mb=%.4f fb=%.4f speedup=%.2fx threads=1 time=%.1fs", mb, fb, fb / mb, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},
      {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}};
  const std::set<std::string> selected(argv + 1, argv + argc);
  const char* titles[] = {"receptive field",         "complexity accounting",
                          "PQMF reconstruction",     "gradient correctness",
                          "loss oracles",            "desk-scale training",
                          "length and determinism",  "relative speed"};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [id, fn] = criteria[i];
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s %s: %s\n", id.c_str(), o.pass ? "PASS" : "FAIL", titles[i],
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
