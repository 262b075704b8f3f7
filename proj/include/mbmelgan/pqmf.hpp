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

// Pseudo-QMF filter bank: a Kaiser-windowed lowpass prototype cosine-modulated
// into B analysis and B synthesis filters. Analysis splits a full-band signal
// into B critically decimated sub-bands; synthesis zero-stuffs each band by B,
// scales it by B, filters and sums. The analysis -> synthesis cascade delays
// the signal by taps - 1 samples.

#include <cstddef>
#include <span>
#include <vector>

#include "mbmelgan/tensor.hpp"

namespace mbmelgan {

struct PqmfDesignOptions {
  std::size_t num_bands = 4;
  std::size_t taps = 64;  // FIR order 63
  double kaiser_beta = 9.0;
  // The design fails unless the impulse round trip reaches this SNR.
  double min_snr_db = 36.0;
};

struct PqmfBank {
  std::size_t num_bands = 4;
  std::size_t taps = 64;
  double kaiser_beta = 9.0;
  double cutoff_ratio = 0.0;  // prototype cutoff as a fraction of pi
  std::vector<double> prototype;
  std::vector<std::vector<double>> analysis;   // num_bands x taps
  std::vector<std::vector<double>> synthesis;  // num_bands x taps

  std::size_t delay() const { return taps - 1; }
};

using SubBands = std::vector<std::vector<double>>;

std::vector<double> kaiser_window(std::size_t length, double beta);
std::vector<double> pqmf_prototype(std::size_t taps, double cutoff_ratio, double kaiser_beta);

// Builds the modulated filters from a stored prototype (no search).
PqmfBank pqmf_from_prototype(std::size_t num_bands, std::vector<double> prototype,
                             double kaiser_beta, double cutoff_ratio);

// Golden-section search of the cutoff over [0.5, 1.5] / (2B), minimizing the
// impulse round-trip error. Throws NumericError with the best SNR found if it
// stays below options.min_snr_db.
PqmfBank design_pqmf(const PqmfDesignOptions& options = {});

// Sub-band k, sample m: sum_n h_k[n] x[B*m - n]. Inputs whose length is not a
// multiple of B are zero-padded at the end.
SubBands analyze(const PqmfBank& bank, std::span<const double> full_band);
// Reference form: full-rate convolution followed by decimation.
SubBands analyze_direct(const PqmfBank& bank, std::span<const double> full_band);

// out[t] = B * sum_k sum_m s_k[m] f_k[t + advance - B*m], t in [0, B*T).
// advance = delay() removes the cascade delay.
std::vector<double> synthesize(const PqmfBank& bank, const SubBands& bands,
                               std::size_t advance = 0);
// Reference form: zero-stuffing, full convolution, then cropping.
std::vector<double> synthesize_direct(const PqmfBank& bank, const SubBands& bands,
                                      std::size_t advance = 0);

// Squared reconstruction error of unit impulses at each decimation phase.
double impulse_reconstruction_error(const PqmfBank& bank);
double impulse_reconstruction_snr_db(const PqmfBank& bank);

// analyze -> synthesize with delay compensation; the input is zero-extended
// so that its tail is fully reconstructed.
double round_trip_snr_db(const PqmfBank& bank, std::span<const double> signal);

// Worst case over bands of passband peak over the largest response beyond the
// neighbouring bands, in dB.
double stopband_attenuation_db(const PqmfBank& bank, std::size_t grid = 4096);

// Differentiable synthesis: bands [B x nb x T] or [nb x T] -> [B x 1 x nb*T]
// or [1 x nb*T].
Tensor pqmf_synthesize(const PqmfBank& bank, const Tensor& bands, std::size_t advance);

}  // namespace mbmelgan
