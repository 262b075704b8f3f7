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

#include "mbmelgan/dsp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mbmelgan/error.hpp"
#include "stft_core.hpp"

namespace mbmelgan {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

AudioBuffer wav_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("wav: cannot open " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("wav: " + path + " is not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      throw FormatError("wav: chunk '" + std::string(chunk, chunk + 4) + "' in " + path +
                        " is truncated");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("wav: fmt chunk too short in " + path);
      const std::uint16_t format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format != 1) {
        throw FormatError("wav: " + path + " uses format tag " + std::to_string(format) +
                          "; only PCM (1) is supported");
      }
      if (channels != 1) {
        throw FormatError("wav: " + path + " has " + std::to_string(channels) +
                          " channels; only mono is supported");
      }
      if (bits != 16) {
        throw FormatError("wav: " + path + " has " + std::to_string(bits) +
                          "-bit samples; only 16-bit PCM is supported");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk in " + path);
      AudioBuffer audio;
      audio.sample_rate = static_cast<int>(rate);
      audio.samples.resize(size / 2);
      for (std::size_t i = 0; i < audio.samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(read_u16(bytes.data() + body + 2 * i));
        audio.samples[i] = static_cast<double>(s) / 32768.0;
      }
      return audio;
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError("wav: no data chunk in " + path);
}

void wav_write(const std::string& path, const AudioBuffer& audio) {
  const auto n = static_cast<std::uint32_t>(audio.samples.size());
  std::vector<unsigned char> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, 2 * n);
  for (double x : audio.samples) {
    if (!std::isfinite(x)) throw NumericError("wav: non-finite sample");
    const double scaled = std::round(x * 32768.0);
    const auto s = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(s));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("wav: cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("wav: write failed for " + path);
}

void StftResolution::validate() const {
  if (fft_size == 0 || window_size == 0 || hop_size == 0) {
    throw ConfigError("stft: fft, window and hop sizes must be positive");
  }
  if (window_size > fft_size) {
    throw ConfigError("stft: window size " + std::to_string(window_size) +
                      " exceeds fft size " + std::to_string(fft_size));
  }
  if (hop_size > window_size) {
    throw ConfigError("stft: hop size " + std::to_string(hop_size) +
                      " exceeds window size " + std::to_string(window_size));
  }
}

std::size_t stft_frame_count(std::size_t length, std::size_t hop_size) {
  return length / hop_size + 1;
}

Spectrogram stft_magnitude(std::span<const double> samples, const StftResolution& res,
                           double floor) {
  if (samples.empty()) throw ShapeError("stft: empty signal");
  const auto layout = stft::make_layout(res);
  const std::size_t frames = layout.frames(samples.size());
  std::vector<std::complex<double>> spec(frames * layout.bins);
  stft::forward(layout, samples.data(), samples.size(), spec.data());
  Spectrogram out;
  out.frames = frames;
  out.bins = layout.bins;
  out.values.resize(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) out.values[i] = std::max(std::abs(spec[i]), floor);
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_filterbank(const MelConfig& config) {
  if (config.n_mels < 2) throw ConfigError("mel: n_mels must be >= 2");
  if (!(config.fmax > config.fmin) || config.fmin < 0.0 ||
      config.fmax > config.sample_rate / 2.0) {
    throw ConfigError("mel: frequency range must satisfy 0 <= fmin < fmax <= sample_rate/2");
  }
  const std::size_t bins = config.fft_size / 2 + 1;
  const double lo = hz_to_mel(config.fmin);
  const double hi = hz_to_mel(config.fmax);
  const double step = (hi - lo) / static_cast<double>(config.n_mels - 1);
  std::vector<double> fb(config.n_mels * bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    const double hz = static_cast<double>(k) * config.sample_rate /
                      static_cast<double>(config.fft_size);
    if (hz < config.fmin || hz > config.fmax) continue;
    const double m = hz_to_mel(hz);
    for (std::size_t j = 0; j < config.n_mels; ++j) {
      const double center = lo + step * static_cast<double>(j);
      fb[j * bins + k] = std::max(0.0, 1.0 - std::abs(m - center) / step);
    }
  }
  return fb;
}

std::size_t mel_frame_count(std::size_t length, std::size_t hop_size) {
  return (length + hop_size - 1) / hop_size;
}

MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const MelConfig& config) {
  if (audio.sample_rate != 16000 || config.sample_rate != 16000) {
    throw ConfigError("mel: only 16000 Hz audio is supported, got " +
                      std::to_string(audio.sample_rate));
  }
  if (audio.samples.empty()) throw ShapeError("mel: empty signal");
  const auto mag = stft_magnitude(audio.samples,
                                  {config.fft_size, config.window_size, config.hop_size}, 0.0);
  const auto fb = mel_filterbank(config);
  MelSpectrogram mel;
  mel.frames = mel_frame_count(audio.samples.size(), config.hop_size);
  mel.n_mels = config.n_mels;
  mel.hop_samples = config.hop_size;
  mel.frame_samples = config.window_size;
  mel.values.resize(mel.frames * mel.n_mels);
  for (std::size_t t = 0; t < mel.frames; ++t) {
    const double* row = mag.values.data() + t * mag.bins;
    for (std::size_t j = 0; j < mel.n_mels; ++j) {
      const double* w = fb.data() + j * mag.bins;
      double acc = 0.0;
      for (std::size_t k = 0; k < mag.bins; ++k) acc += w[k] * row[k];
      mel.at(t, j) = std::log(std::max(acc, config.floor));
    }
  }
  return mel;
}

FeatureStats fit_stats(std::span<const MelSpectrogram> corpus) {
  if (corpus.empty()) throw ConfigError("fit_stats: empty corpus");
  const std::size_t n_mels = corpus.front().n_mels;
  std::size_t count = 0;
  FeatureStats stats;
  stats.mean.assign(n_mels, 0.0);
  stats.stddev.assign(n_mels, 0.0);
  for (const auto& mel : corpus) {
    if (mel.n_mels != n_mels) throw ShapeError("fit_stats: inconsistent n_mels in corpus");
    for (std::size_t t = 0; t < mel.frames; ++t)
      for (std::size_t j = 0; j < n_mels; ++j) stats.mean[j] += mel.at(t, j);
    count += mel.frames;
  }
  if (count == 0) throw ConfigError("fit_stats: corpus has no frames");
  for (double& m : stats.mean) m /= static_cast<double>(count);
  for (const auto& mel : corpus)
    for (std::size_t t = 0; t < mel.frames; ++t)
      for (std::size_t j = 0; j < n_mels; ++j) {
        const double d = mel.at(t, j) - stats.mean[j];
        stats.stddev[j] += d * d;
      }
  for (std::size_t j = 0; j < n_mels; ++j) {
    stats.stddev[j] = std::sqrt(stats.stddev[j] / static_cast<double>(count));
    if (!(stats.stddev[j] > 1e-12 * std::max(1.0, std::abs(stats.mean[j])))) {
      throw NumericError("fit_stats: mel bin " + std::to_string(j) + " has zero variance");
    }
  }
  return stats;
}

namespace {

MelSpectrogram affine(const MelSpectrogram& mel, const FeatureStats& stats, bool forward) {
  if (stats.mean.size() != mel.n_mels || stats.stddev.size() != mel.n_mels) {
    throw ShapeError("normalize: stats cover " + std::to_string(stats.mean.size()) +
                     " bins but features have n_mels=" + std::to_string(mel.n_mels));
  }
  MelSpectrogram out = mel;
  for (std::size_t t = 0; t < mel.frames; ++t)
    for (std::size_t j = 0; j < mel.n_mels; ++j) {
      out.at(t, j) = forward ? (mel.at(t, j) - stats.mean[j]) / stats.stddev[j]
                             : mel.at(t, j) * stats.stddev[j] + stats.mean[j];
    }
  return out;
}

}  // namespace

MelSpectrogram normalize(const MelSpectrogram& mel, const FeatureStats& stats) {
  return affine(mel, stats, true);
}

MelSpectrogram denormalize(const MelSpectrogram& mel, const FeatureStats& stats) {
  return affine(mel, stats, false);
}

}  // namespace mbmelgan
