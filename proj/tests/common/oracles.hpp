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

// Brute-force reference implementations used as test oracles. They share no
// code with the library: plain loops, an O(N^2) DFT from a cosine table, and
// scalar accumulation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

inline long reflect(long i, long n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

// x [c_in x t], w [c_out x c_in/groups x k] -> [c_out x t_out].
inline std::vector<double> conv1d(const std::vector<double>& x, std::size_t c_in, std::size_t t,
                                  const std::vector<double>& w, std::size_t c_out, std::size_t k,
                                  const std::vector<double>& bias, std::size_t stride,
                                  std::size_t dilation, std::size_t groups, std::size_t pad,
                                  bool reflect_pad, std::size_t* t_out_ret = nullptr) {
  const long padded = static_cast<long>(t + 2 * pad);
  const long span = static_cast<long>(dilation * (k - 1) + 1);
  const std::size_t t_out = static_cast<std::size_t>((padded - span) / static_cast<long>(stride) + 1);
  if (t_out_ret) *t_out_ret = t_out;
  const std::size_t cin_g = c_in / groups;
  const std::size_t cout_g = c_out / groups;
  std::vector<double> y(c_out * t_out, 0.0);
  for (std::size_t o = 0; o < c_out; ++o) {
    const std::size_t grp = o / cout_g;
    for (std::size_t n = 0; n < t_out; ++n) {
      double acc = bias.empty() ? 0.0 : bias[o];
      for (std::size_t ci = 0; ci < cin_g; ++ci) {
        const std::size_t c = grp * cin_g + ci;
        for (std::size_t j = 0; j < k; ++j) {
          long i = static_cast<long>(n * stride + j * dilation) - static_cast<long>(pad);
          double v = 0.0;
          if (i >= 0 && i < static_cast<long>(t)) {
            v = x[c * t + static_cast<std::size_t>(i)];
          } else if (reflect_pad) {
            v = x[c * t + static_cast<std::size_t>(reflect(i, static_cast<long>(t)))];
          }
          acc += w[(o * cin_g + ci) * k + j] * v;
        }
      }
      y[o * t_out + n] = acc;
    }
  }
  return y;
}

// Scatter form of a transposed convolution. w [c_out x c_in x k]; the full
// output of length (t-1)*stride + k is cropped to [pad, pad + stride*t).
inline std::vector<double> conv_transpose1d(const std::vector<double>& x, std::size_t c_in,
                                            std::size_t t, const std::vector<double>& w,
                                            std::size_t c_out, std::size_t k,
                                            const std::vector<double>& bias, std::size_t stride,
                                            std::size_t pad) {
  const std::size_t full = (t - 1) * stride + k;
  std::vector<double> y_full(c_out * full, 0.0);
  for (std::size_t o = 0; o < c_out; ++o)
    for (std::size_t c = 0; c < c_in; ++c)
      for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < k; ++j)
          y_full[o * full + i * stride + j] += x[c * t + i] * w[(o * c_in + c) * k + j];
  const std::size_t len = stride * t;
  std::vector<double> y(c_out * len);
  for (std::size_t o = 0; o < c_out; ++o)
    for (std::size_t n = 0; n < len; ++n)
      y[o * len + n] = y_full[o * full + n + pad] + (bias.empty() ? 0.0 : bias[o]);
  return y;
}

struct Mag {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> v;
};

// Centered STFT magnitude: reflection padding of fft/2 on both sides, frame f
// at f*hop, periodic Hann of `win` samples centered in the fft frame, DFT by
// direct summation.
inline Mag stft_mag(const std::vector<double>& x, std::size_t fft, std::size_t win,
                    std::size_t hop, double floor) {
  const long n = static_cast<long>(x.size());
  Mag m;
  m.frames = x.size() / hop + 1;
  m.bins = fft / 2 + 1;
  m.v.resize(m.frames * m.bins);
  std::vector<double> ctab(fft), stab(fft);
  for (std::size_t i = 0; i < fft; ++i) {
    ctab[i] = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(fft));
    stab[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(fft));
  }
  const std::size_t off = (fft - win) / 2;
  std::vector<double> frame(fft);
  for (std::size_t f = 0; f < m.frames; ++f) {
    for (std::size_t i = 0; i < fft; ++i) {
      double wv = 0.0;
      if (i >= off && i < off + win) {
        wv = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i - off) /
                                  static_cast<double>(win));
      }
      const long src = static_cast<long>(f * hop + i) - static_cast<long>(fft / 2);
      frame[i] = wv * x[static_cast<std::size_t>(reflect(src, n))];
    }
    for (std::size_t b = 0; b < m.bins; ++b) {
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < fft; ++i) {
        const std::size_t idx = (b * i) % fft;
        re += frame[i] * ctab[idx];
        im -= frame[i] * stab[idx];
      }
      m.v[f * m.bins + b] = std::max(std::sqrt(re * re + im * im), floor);
    }
  }
  return m;
}

inline double spectral_convergence(const Mag& r, const Mag& f) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < r.v.size(); ++i) {
    num += (r.v[i] - f.v[i]) * (r.v[i] - f.v[i]);
    den += r.v[i] * r.v[i];
  }
  return std::sqrt(num) / std::sqrt(den);
}

inline double log_mag(const Mag& r, const Mag& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < r.v.size(); ++i) acc += std::abs(std::log(r.v[i]) - std::log(f.v[i]));
  return acc / static_cast<double>(r.v.size());
}

struct Res {
  std::size_t fft, win, hop;
};

// Multi-resolution loss for a batch of rows: spectral convergence averaged
// over rows plus log-magnitude distance over all rows' bins, averaged over
// resolutions.
inline double multi_res_stft(const std::vector<std::vector<double>>& real,
                             const std::vector<std::vector<double>>& fake,
                             const std::vector<Res>& resolutions, double floor = 1e-7) {
  double total = 0.0;
  for (const auto& r : resolutions) {
    double sc = 0.0, lm = 0.0;
    std::size_t count = 0;
    for (std::size_t row = 0; row < real.size(); ++row) {
      const Mag a = stft_mag(real[row], r.fft, r.win, r.hop, floor);
      const Mag b = stft_mag(fake[row], r.fft, r.win, r.hop, floor);
      sc += spectral_convergence(a, b);
      lm += log_mag(a, b) * static_cast<double>(a.v.size());
      count += a.v.size();
    }
    total += sc / static_cast<double>(real.size()) + lm / static_cast<double>(count);
  }
  return total / static_cast<double>(resolutions.size());
}

inline double d_loss(const std::vector<std::vector<double>>& real,
                     const std::vector<std::vector<double>>& fake) {
  double total = 0.0;
  for (std::size_t k = 0; k < real.size(); ++k) {
    double a = 0.0, b = 0.0;
    for (double v : real[k]) a += (v - 1.0) * (v - 1.0);
    for (double v : fake[k]) b += v * v;
    total += a / static_cast<double>(real[k].size()) + b / static_cast<double>(fake[k].size());
  }
  return total;
}

inline double g_adv(const std::vector<std::vector<double>>& fake) {
  double total = 0.0;
  for (const auto& s : fake) {
    double a = 0.0;
    for (double v : s) a += (v - 1.0) * (v - 1.0);
    total += a / static_cast<double>(s.size());
  }
  return total;
}

inline double feature_matching(const std::vector<std::vector<std::vector<double>>>& real,
                               const std::vector<std::vector<std::vector<double>>>& fake) {
  double total = 0.0;
  for (std::size_t k = 0; k < real.size(); ++k)
    for (std::size_t i = 0; i < real[k].size(); ++i) {
      double a = 0.0;
      for (std::size_t j = 0; j < real[k][i].size(); ++j)
        a += std::abs(real[k][i][j] - fake[k][i][j]);
      total += a / static_cast<double>(real[k][i].size());
    }
  return total;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace oracle
