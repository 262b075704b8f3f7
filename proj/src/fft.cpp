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

#include "mbmelgan/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "mbmelgan/error.hpp"

namespace mbmelgan {

namespace {

// FFTW's planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plans {
  explicit Plans(std::size_t n) : n(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
    r2c = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, FFTW_ESTIMATE);
    c2r = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, FFTW_ESTIMATE);
    if (!r2c || !c2r) throw Error("fftw: failed to plan length " + std::to_string(n));
  }
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
    fftw_free(real);
    fftw_free(spec);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;

  std::size_t n;
  double* real;
  fftw_complex* spec;
  fftw_plan r2c;
  fftw_plan c2r;
};

Plans& plans_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<Plans>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<Plans>(n)).first;
  return *it->second;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n), plans_(nullptr) {
  if (n == 0) throw ConfigError("fft: length must be positive");
  plans_ = &plans_for(n);
}

void RealFft::forward(const double* in, std::complex<double>* out) const {
  auto& p = *static_cast<Plans*>(plans_);
  std::copy(in, in + n_, p.real);
  fftw_execute(p.r2c);
  for (std::size_t k = 0; k < bins(); ++k) out[k] = {p.spec[k][0], p.spec[k][1]};
}

void RealFft::inverse(const std::complex<double>* in, double* out) const {
  auto& p = *static_cast<Plans*>(plans_);
  for (std::size_t k = 0; k < bins(); ++k) {
    p.spec[k][0] = in[k].real();
    p.spec[k][1] = in[k].imag();
  }
  p.spec[0][1] = 0.0;
  if (n_ % 2 == 0) p.spec[n_ / 2][1] = 0.0;
  fftw_execute(p.c2r);
  std::copy(p.real, p.real + n_, out);
}

}  // namespace mbmelgan
