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

#include <complex>
#include <cstddef>

namespace mbmelgan {

// Real-input DFT of arbitrary length backed by cached FFTW plans. Instances
// are cheap handles onto per-thread cached plans and must stay on the thread
// that created them.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // out[k] = sum_n in[n] exp(-2 pi i k n / N), k = 0 .. N/2.
  void forward(const double* in, std::complex<double>* out) const;
  // Unnormalized inverse of a Hermitian half spectrum:
  // out[n] = sum_{k=0}^{N-1} Z_k exp(2 pi i k n / N), with Z_{N-k} = conj(Z_k).
  // The imaginary parts of Z_0 (and Z_{N/2} for even N) are ignored.
  void inverse(const std::complex<double>* in, double* out) const;

 private:
  std::size_t n_;
  void* plans_;
};

}  // namespace mbmelgan
