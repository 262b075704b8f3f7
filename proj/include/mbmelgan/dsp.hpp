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

// Waveform I/O, STFT magnitudes and log-mel conditioning features.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mbmelgan {

struct AudioBuffer {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 16000;

  double seconds() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
};

// 16-bit PCM mono only. Samples map to int16 as round(x * 32768), clamped.
AudioBuffer wav_read(const std::string& path);
void wav_write(const std::string& path, const AudioBuffer& audio);

struct StftResolution {
  std::size_t fft_size = 1024;
  std::size_t window_size = 600;
  std::size_t hop_size = 120;

  void validate() const;
  bool operator==(const StftResolution&) const = default;
};

// Frames of a centered STFT: the signal is reflection-padded by fft_size/2 on
// both sides and frame f starts at f * hop in the padded signal.
std::size_t stft_frame_count(std::size_t length, std::size_t hop_size);

struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> values;  // frames x bins, row-major

  double at(std::size_t frame, std::size_t bin) const { return values[frame * bins + bin]; }
};

// Periodic Hann window of window_size samples, centered inside an fft_size
// frame, magnitude sqrt(re^2 + im^2) floored at `floor`.
Spectrogram stft_magnitude(std::span<const double> samples, const StftResolution& res,
                           double floor = 1e-7);

struct MelConfig {
  int sample_rate = 16000;
  std::size_t fft_size = 1024;
  std::size_t window_size = 800;  // 50 ms
  std::size_t hop_size = 200;     // 12.5 ms
  std::size_t n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double floor = 1e-7;

  bool operator==(const MelConfig&) const = default;
};

double hz_to_mel(double hz);  // HTK: 2595 log10(1 + f/700)
double mel_to_hz(double mel);

// [n_mels x (fft_size/2 + 1)] triangular filters. Centers are evenly spaced on
// the mel scale from fmin to fmax and each triangle reaches zero at its
// neighbours' centers, so every bin in [fmin, fmax] has positive weight.
std::vector<double> mel_filterbank(const MelConfig& config);

struct MelSpectrogram {
  std::size_t frames = 0;
  std::size_t n_mels = 0;
  std::size_t hop_samples = 200;
  std::size_t frame_samples = 800;
  std::vector<double> values;  // frames x n_mels, row-major

  double at(std::size_t frame, std::size_t bin) const { return values[frame * n_mels + bin]; }
  double& at(std::size_t frame, std::size_t bin) { return values[frame * n_mels + bin]; }
};

// Number of mel frames for a clip: ceil(length / hop).
std::size_t mel_frame_count(std::size_t length, std::size_t hop_size);

// Natural log of floored mel-weighted magnitudes. Only 16 kHz input is
// accepted.
MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const MelConfig& config = {});

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Per-bin mean and population standard deviation over every frame of the
// corpus. A bin with zero variance is an error.
FeatureStats fit_stats(std::span<const MelSpectrogram> corpus);
MelSpectrogram normalize(const MelSpectrogram& mel, const FeatureStats& stats);
MelSpectrogram denormalize(const MelSpectrogram& mel, const FeatureStats& stats);

}  // namespace mbmelgan
