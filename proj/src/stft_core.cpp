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

#include "stft_core.hpp"

#include <cmath>
#include <numbers>

#include "conv_kernels.hpp"

namespace mbmelgan::stft {

Layout make_layout(const StftResolution& res) {
  res.validate();
  Layout l;
  l.fft = res.fft_size;
  l.win = res.window_size;
  l.hop = res.hop_size;
  l.pad = l.fft / 2;
  l.offset = (l.fft - l.win) / 2;
  l.bins = l.fft / 2 + 1;
  l.window.assign(l.fft, 0.0);
  for (std::size_t n = 0; n < l.win; ++n) {
    l.window[l.offset + n] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                             static_cast<double>(l.win));
  }
  return l;
}

namespace {

inline std::size_t source_index(const Layout& l, std::size_t frame, std::size_t n,
                                std::size_t length) {
  const auto i = static_cast<std::ptrdiff_t>(frame * l.hop + n) -
                 static_cast<std::ptrdiff_t>(l.pad);
  return static_cast<std::size_t>(
      kernels::reflect_index(i, static_cast<std::ptrdiff_t>(length)));
}

}  // namespace

void forward(const Layout& l, const double* x, std::size_t length,
             std::complex<double>* spec) {
  const RealFft fft(l.fft);
  std::vector<double> buf(l.fft, 0.0);
  const std::size_t frames = l.frames(length);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t n = l.offset; n < l.offset + l.win; ++n) {
      buf[n] = l.window[n] * x[source_index(l, f, n, length)];
    }
    fft.forward(buf.data(), spec + f * l.bins);
  }
}

void adjoint(const Layout& l, const std::complex<double>* gspec, std::size_t length,
             double* gx) {
  const RealFft fft(l.fft);
  const std::size_t frames = l.frames(length);
  const bool even = l.fft % 2 == 0;
  std::vector<std::complex<double>> half(l.bins);
  std::vector<double> df(l.fft);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::complex<double>* g = gspec + f * l.bins;
    // The c2r transform doubles interior bins, so they are halved here.
    for (std::size_t k = 0; k < l.bins; ++k) {
      const bool edge = k == 0 || (even && k == l.fft / 2);
      half[k] = edge ? g[k] : 0.5 * g[k];
    }
    fft.inverse(half.data(), df.data());
    for (std::size_t n = l.offset; n < l.offset + l.win; ++n) {
      gx[source_index(l, f, n, length)] += l.window[n] * df[n];
    }
  }
}

}  // namespace mbmelgan::stft
