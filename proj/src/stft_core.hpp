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

// Centered, Hann-windowed STFT framing shared by the feature extractor and the
// differentiable STFT-magnitude op.

#include <complex>
#include <cstddef>
#include <vector>

#include "mbmelgan/dsp.hpp"
#include "mbmelgan/fft.hpp"

namespace mbmelgan::stft {

struct Layout {
  std::size_t fft = 0;
  std::size_t win = 0;
  std::size_t hop = 0;
  std::size_t pad = 0;     // reflection padding on each side
  std::size_t offset = 0;  // window start inside the fft frame
  std::size_t bins = 0;
  std::vector<double> window;  // fft samples, zero outside the window

  std::size_t frames(std::size_t length) const { return stft_frame_count(length, hop); }
};

Layout make_layout(const StftResolution& res);

// spec: frames(length) x bins complex values.
void forward(const Layout& layout, const double* x, std::size_t length,
             std::complex<double>* spec);

// Adjoint of forward for real-valued losses: gspec holds dL/dRe + i dL/dIm for
// each coefficient; the signal gradient is accumulated into gx.
void adjoint(const Layout& layout, const std::complex<double>* gspec, std::size_t length,
             double* gx);

}  // namespace mbmelgan::stft
