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

// Deterministic synthetic signals: a speech-like clip (voiced syllables through
// formant resonators, fricative bursts and pauses), white noise and a chirp.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace mbmelgan::signals {

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double stddev = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(rng);
  return x;
}

// Linear sweep from f0 to f1 Hz.
inline std::vector<double> chirp(std::size_t n, double f0 = 0.0, double f1 = 8000.0,
                                 double rate = 16000.0, double amplitude = 0.5) {
  std::vector<double> x(n);
  const double dur = static_cast<double>(n) / rate;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double phase = 2.0 * std::numbers::pi * (f0 * t + 0.5 * (f1 - f0) * t * t / dur);
    x[i] = amplitude * std::sin(phase);
  }
  return x;
}

namespace detail {

// Two-pole resonator y[n] = g x[n] + a1 y[n-1] + a2 y[n-2].
struct Resonator {
  double a1 = 0.0, a2 = 0.0, g = 1.0, y1 = 0.0, y2 = 0.0;
  void tune(double freq, double bandwidth, double rate) {
    const double r = std::exp(-std::numbers::pi * bandwidth / rate);
    a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / rate);
    a2 = -r * r;
    g = 1.0 - r;
  }
  double step(double x) {
    const double y = g * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

}  // namespace detail

inline std::vector<double> speech_like(std::size_t n, std::uint64_t seed = 7,
                                       double rate = 16000.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Syllable plan: ~180 ms units that are voiced, fricative or silent.
  struct Unit {
    std::size_t start, end;
    int kind;  // 0 voiced, 1 fricative, 2 pause
    double f1, f2, f3, f0;
  };
  std::vector<Unit> units;
  std::size_t pos = 0;
  while (pos < n) {
    const std::size_t len = static_cast<std::size_t>(rate * (0.08 + 0.14 * uni(rng)));
    const double u = uni(rng);
    const int kind = u < 0.65 ? 0 : (u < 0.85 ? 1 : 2);
    units.push_back({pos, std::min(n, pos + len), kind, 300.0 + 500.0 * uni(rng),
                     900.0 + 1400.0 * uni(rng), 2300.0 + 700.0 * uni(rng),
                     100.0 + 90.0 * uni(rng)});
    pos += len;
  }

  std::vector<double> x(n, 0.0);
  detail::Resonator r1, r2, r3, hp;
  double phase = 0.0;
  double f0 = units.front().f0;
  double formants[3] = {units.front().f1, units.front().f2, units.front().f3};
  double prev_noise = 0.0;
  for (const auto& unit : units) {
    for (std::size_t i = unit.start; i < unit.end; ++i) {
      const double frac = static_cast<double>(i - unit.start) /
                          static_cast<double>(std::max<std::size_t>(1, unit.end - unit.start));
      const double env = std::sin(std::numbers::pi * frac);
      // Glide pitch and formants towards the unit targets.
      f0 += 0.002 * (unit.f0 * (1.0 + 0.1 * std::sin(2.0 * std::numbers::pi * frac)) - f0);
      const double targets[3] = {unit.f1, unit.f2, unit.f3};
      for (int k = 0; k < 3; ++k) formants[k] += 0.003 * (targets[k] - formants[k]);
      r1.tune(formants[0], 90.0, rate);
      r2.tune(formants[1], 120.0, rate);
      r3.tune(formants[2], 180.0, rate);
      double sample = 0.0;
      if (unit.kind == 0) {
        phase += f0 / rate;
        if (phase >= 1.0) phase -= 1.0;
        // Band-limited sawtooth-like glottal source.
        double src = 0.0;
        for (int h = 1; h * f0 < 0.45 * rate && h <= 40; ++h) {
          src += std::sin(2.0 * std::numbers::pi * h * phase) / h;
        }
        src += 0.02 * gauss(rng);
        sample = env * (r1.step(src) * 6.0 + r2.step(src) * 4.0 + r3.step(src) * 2.0);
      } else if (unit.kind == 1) {
        const double noise = gauss(rng);
        const double high = noise - prev_noise;  // first difference tilts towards highs
        prev_noise = noise;
        hp.tune(4000.0 + 1500.0 * std::sin(frac), 2500.0, rate);
        sample = env * 0.6 * (0.5 * high + hp.step(noise) * 3.0);
      } else {
        sample = 1e-3 * gauss(rng);
      }
      x[i] = sample;
    }
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  for (auto& v : x) v *= 0.6 / peak;
  return x;
}

}  // namespace mbmelgan::signals
