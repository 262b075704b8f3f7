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

// 32-bit inference path: weight normalization folded into plain kernels,
// chunked generation with receptive-field context, PQMF synthesis for
// multi-band models, and a real-time-factor benchmark.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mbmelgan/checkpoint.hpp"
#include "mbmelgan/dsp.hpp"
#include "mbmelgan/models.hpp"

namespace mbmelgan {

class InferenceGenerator {
 public:
  InferenceGenerator() = default;
  explicit InferenceGenerator(const Generator& gen);

  const GeneratorSpec& spec() const;
  // mel: channel-first [n_mels x frames]. Returns [out_channels x L] with
  // L = channel_samples_per_frame * frames.
  std::vector<float> forward(const float* mel, std::size_t frames) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

class Vocoder {
 public:
  explicit Vocoder(const ModelBundle& bundle);
  static Vocoder load(const std::string& checkpoint_path);

  const GeneratorSpec& spec() const { return engine_.spec(); }
  const MelConfig& features() const { return features_; }
  bool has_stats() const { return stats_.has_value(); }
  const InferenceGenerator& engine() const { return engine_; }

  // Raw log-mel in, waveform of exactly 200 * frames samples out. The mel is
  // normalized with the checkpoint statistics when present.
  std::vector<double> synthesize(const MelSpectrogram& raw_mel, std::size_t chunk_frames = 0,
                                 std::size_t threads = 1) const;
  std::vector<double> synthesize_normalized(const MelSpectrogram& mel,
                                            std::size_t chunk_frames = 0,
                                            std::size_t threads = 1) const;

  // Generator output [out_channels x L] for a normalized mel. With
  // chunk_frames > 0 the input is processed in chunks of that many frames,
  // each extended by context_frames() on both sides; chunks are distributed
  // over `threads` workers.
  std::vector<float> generate(const MelSpectrogram& mel, std::size_t chunk_frames = 0,
                              std::size_t threads = 1) const;

  // Sub-band (or full-band) generator output to waveform.
  std::vector<double> to_waveform(const std::vector<float>& generated, std::size_t frames) const;

  std::size_t context_frames() const { return context_; }

 private:
  InferenceGenerator engine_;
  MelConfig features_;
  std::optional<FeatureStats> stats_;
  std::optional<PqmfBank> pqmf_;
  std::size_t context_ = 0;
};

struct BenchOptions {
  double seconds = 1.0;
  std::size_t threads = 1;
  std::size_t warmup = 1;
  std::size_t iterations = 3;
  std::uint64_t seed = 0;
};

struct BenchReport {
  double rtf = 0.0;  // wall seconds per second of generated audio
  double samples_per_second = 0.0;
  double wall_seconds = 0.0;  // mean over measured iterations
  double audio_seconds = 0.0;
  std::size_t thread_count = 1;
  std::size_t warmup = 0;
  std::size_t iterations = 0;

  // key=value lines.
  std::string to_text() const;
};

// Times synthesis of a seeded random (normalized-domain) mel of the given
// duration, after warmup runs.
BenchReport bench(const Vocoder& vocoder, const BenchOptions& options);

}  // namespace mbmelgan
