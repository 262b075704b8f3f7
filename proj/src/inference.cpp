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

#include "mbmelgan/inference.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "conv_kernels.hpp"
#include "mbmelgan/error.hpp"

namespace mbmelgan {

namespace {

struct PlainConv {
  kernels::ConvGeometry g;
  std::vector<float> w;
  std::vector<float> b;

  // x [c_in x t] -> y [c_out x t_out]
  void run(const std::vector<float>& x, std::size_t t, std::vector<float>& y) const {
    y.resize(g.c_out * g.out_length(t));
    kernels::conv1d_forward<float>(g, x.data(), t, w.data(), b.data(), y.data());
  }
};

struct TransposedConv {
  kernels::TransposedGeometry g;
  kernels::RowMat<float> wmat;
  std::vector<float> b;

  void run(const std::vector<float>& x, std::size_t t, std::vector<float>& y) const {
    y.resize(g.c_out * g.out_length(t));
    kernels::conv_transpose1d_forward<float>(g, wmat, x.data(), t, b.data(), y.data());
  }
};

std::vector<float> to_float(std::span<const double> v) { return {v.begin(), v.end()}; }

std::vector<float> folded_weight(const WnConv& c) {
  NoGradGuard guard;
  return to_float(c.weight().data());
}

PlainConv fold(const WnConv& c) {
  PlainConv p;
  p.g.c_in = c.c_in;
  p.g.c_out = c.c_out;
  p.g.kernel = c.kernel;
  p.g.stride = c.stride;
  p.g.dilation = c.dilation;
  p.g.groups = c.groups;
  p.g.pad_left = p.g.pad_right = c.dilation * (c.kernel - 1) / 2;
  p.g.pad_mode = c.pad_mode;
  p.w = folded_weight(c);
  p.b = to_float(c.bias.data());
  return p;
}

TransposedConv fold_transposed(const WnConv& c) {
  TransposedConv t;
  t.g.c_in = c.c_in;
  t.g.c_out = c.c_out;
  t.g.stride = c.stride;
  t.g.kernel = c.kernel;
  t.g.padding = transposed_padding(c.stride);
  const auto w = folded_weight(c);
  t.wmat = kernels::transposed_weight_matrix<float>(t.g, w.data());
  t.b = to_float(c.bias.data());
  return t;
}

void leaky(std::vector<float>& x, float slope) {
  for (auto& v : x) v = v > 0.0f ? v : slope * v;
}

}  // namespace

struct InferenceGenerator::Impl {
  struct Block {
    PlainConv dilated;
    PlainConv pointwise;
    std::optional<PlainConv> shortcut;
  };
  struct Stage {
    TransposedConv up;
    std::vector<Block> blocks;
  };
  GeneratorSpec spec;
  PlainConv entry;
  std::vector<Stage> stages;
  PlainConv exit;
};

InferenceGenerator::InferenceGenerator(const Generator& gen) {
  auto impl = std::make_shared<Impl>();
  impl->spec = gen.spec();
  impl->entry = fold(gen.entry());
  for (const auto& st : gen.stages()) {
    Impl::Stage s;
    s.up = fold_transposed(st.upsample);
    for (const auto& rb : st.blocks) {
      Impl::Block b;
      b.dilated = fold(rb.dilated);
      b.pointwise = fold(rb.pointwise);
      if (rb.shortcut) b.shortcut = fold(*rb.shortcut);
      s.blocks.push_back(std::move(b));
    }
    impl->stages.push_back(std::move(s));
  }
  impl->exit = fold(gen.exit());
  impl_ = std::move(impl);
}

const GeneratorSpec& InferenceGenerator::spec() const {
  if (!impl_) throw Error("inference generator is empty");
  return impl_->spec;
}

std::vector<float> InferenceGenerator::forward(const float* mel, std::size_t frames) const {
  const Impl& m = *impl_;
  if (frames == 0) throw ShapeError("inference: no mel frames");
  const auto slope = static_cast<float>(m.spec.slope);
  std::vector<float> x(mel, mel + m.spec.n_mels * frames);
  std::vector<float> y;
  std::vector<float> a;
  std::vector<float> s;
  std::size_t t = frames;
  m.entry.run(x, t, y);
  leaky(y, slope);
  std::swap(x, y);
  for (const auto& st : m.stages) {
    st.up.run(x, t, y);
    t = st.up.g.out_length(t);
    std::swap(x, y);
    for (const auto& b : st.blocks) {
      a = x;
      leaky(a, slope);
      b.dilated.run(a, t, y);
      leaky(y, slope);
      b.pointwise.run(y, t, a);
      if (b.shortcut) {
        b.shortcut->run(x, t, s);
        for (std::size_t i = 0; i < a.size(); ++i) x[i] = s[i] + a[i];
      } else {
        for (std::size_t i = 0; i < a.size(); ++i) x[i] += a[i];
      }
    }
    leaky(x, slope);
  }
  m.exit.run(x, t, y);
  for (auto& v : y) v = std::tanh(v);
  return y;
}

Vocoder::Vocoder(const ModelBundle& bundle)
    : engine_(bundle.generator),
      features_(bundle.features),
      stats_(bundle.stats),
      pqmf_(bundle.pqmf),
      context_(mbmelgan::context_frames(bundle.spec)) {
  if (bundle.spec.variant == Variant::MB && !pqmf_) {
    throw ConfigError("vocoder: multi-band model without a PQMF bank");
  }
}

Vocoder Vocoder::load(const std::string& path) { return Vocoder(load_model(read_checkpoint(path))); }

std::vector<float> Vocoder::generate(const MelSpectrogram& mel, std::size_t chunk_frames,
                                     std::size_t threads) const {
  const GeneratorSpec& spec = engine_.spec();
  if (mel.frames == 0) throw ShapeError("vocoder: empty mel spectrogram");
  if (mel.n_mels != spec.n_mels) {
    throw ShapeError("vocoder: mel has " + std::to_string(mel.n_mels) + " bins, model expects " +
                     std::to_string(spec.n_mels));
  }
  const std::size_t frames = mel.frames;
  const std::size_t per_frame = spec.channel_samples_per_frame();
  const std::size_t channels = spec.out_channels;
  const std::size_t len = frames * per_frame;
  const std::size_t chunk = chunk_frames == 0 ? frames : chunk_frames;
  const std::size_t n_chunks = (frames + chunk - 1) / chunk;
  std::vector<float> out(channels * len);

  const auto run_chunk = [&](std::size_t ci) {
    const std::size_t a = ci * chunk;
    const std::size_t b = std::min(frames, a + chunk);
    const std::size_t lo = a > context_ ? a - context_ : 0;
    const std::size_t hi = std::min(frames, b + context_);
    const std::size_t n = hi - lo;
    std::vector<float> input(spec.n_mels * n);
    for (std::size_t m = 0; m < spec.n_mels; ++m)
      for (std::size_t f = 0; f < n; ++f)
        input[m * n + f] = static_cast<float>(mel.at(lo + f, m));
    const std::vector<float> y = engine_.forward(input.data(), n);
    const std::size_t ylen = n * per_frame;
    for (std::size_t c = 0; c < channels; ++c) {
      std::copy(y.begin() + static_cast<std::ptrdiff_t>(c * ylen + (a - lo) * per_frame),
                y.begin() + static_cast<std::ptrdiff_t>(c * ylen + (b - lo) * per_frame),
                out.begin() + static_cast<std::ptrdiff_t>(c * len + a * per_frame));
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n_chunks));
  if (workers == 1) {
    for (std::size_t ci = 0; ci < n_chunks; ++ci) run_chunk(ci);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t ci = next++; ci < n_chunks; ci = next++) run_chunk(ci);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return out;
}

std::vector<double> Vocoder::to_waveform(const std::vector<float>& generated,
                                         std::size_t frames) const {
  const GeneratorSpec& spec = engine_.spec();
  const std::size_t per_channel = frames * spec.channel_samples_per_frame();
  if (generated.size() != spec.out_channels * per_channel) {
    throw ShapeError("vocoder: generated signal has " + std::to_string(generated.size()) +
                     " values, expected " + std::to_string(spec.out_channels * per_channel));
  }
  std::vector<double> wave;
  if (spec.variant == Variant::MB) {
    SubBands bands(spec.out_channels);
    for (std::size_t k = 0; k < spec.out_channels; ++k) {
      bands[k].assign(generated.begin() + static_cast<std::ptrdiff_t>(k * per_channel),
                      generated.begin() + static_cast<std::ptrdiff_t>((k + 1) * per_channel));
    }
    wave = mbmelgan::synthesize(*pqmf_, bands, pqmf_->delay());
  } else {
    wave.assign(generated.begin(), generated.end());
  }
  for (auto& v : wave) v = std::clamp(v, -1.0, 1.0);
  return wave;
}

std::vector<double> Vocoder::synthesize_normalized(const MelSpectrogram& mel,
                                                   std::size_t chunk_frames,
                                                   std::size_t threads) const {
  return to_waveform(generate(mel, chunk_frames, threads), mel.frames);
}

std::vector<double> Vocoder::synthesize(const MelSpectrogram& raw_mel, std::size_t chunk_frames,
                                        std::size_t threads) const {
  if (!stats_) return synthesize_normalized(raw_mel, chunk_frames, threads);
  return synthesize_normalized(normalize(raw_mel, *stats_), chunk_frames, threads);
}

std::string BenchReport::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << "rtf=" << rtf << "\n"
     << "samples_per_second=" << samples_per_second << "\n"
     << "wall_seconds=" << wall_seconds << "\n"
     << "audio_seconds=" << audio_seconds << "\n"
     << "thread_count=" << thread_count << "\n"
     << "warmup=" << warmup << "\n"
     << "iterations=" << iterations << "\n";
  return os.str();
}

BenchReport bench(const Vocoder& vocoder, const BenchOptions& options) {
  if (!(options.seconds > 0.0)) throw ConfigError("bench: seconds must be positive");
  if (options.iterations == 0) throw ConfigError("bench: iterations must be >= 1");
  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  const GeneratorSpec& spec = vocoder.spec();
  MelSpectrogram mel;
  mel.n_mels = spec.n_mels;
  mel.frames = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(options.seconds * 16000.0 / kSamplesPerFrame)));
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  mel.values.resize(mel.frames * mel.n_mels);
  for (auto& v : mel.values) v = dist(rng);
  // Threads split the utterance into equal chunks.
  const std::size_t chunk = threads == 1 ? 0 : (mel.frames + threads - 1) / threads;

  for (std::size_t i = 0; i < options.warmup; ++i) vocoder.synthesize_normalized(mel, chunk, threads);
  double total = 0.0;
  for (std::size_t i = 0; i < options.iterations; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto wave = vocoder.synthesize_normalized(mel, chunk, threads);
    total += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (wave.empty()) throw Error("bench: empty synthesis");
  }
  BenchReport r;
  r.audio_seconds = static_cast<double>(mel.frames * kSamplesPerFrame) / 16000.0;
  r.wall_seconds = total / static_cast<double>(options.iterations);
  r.rtf = r.wall_seconds / r.audio_seconds;
  r.samples_per_second = static_cast<double>(mel.frames * kSamplesPerFrame) / r.wall_seconds;
  r.thread_count = threads;
  r.warmup = options.warmup;
  r.iterations = options.iterations;
  return r;
}

}  // namespace mbmelgan
