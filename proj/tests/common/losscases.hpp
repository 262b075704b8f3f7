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

// Loss implementations against the brute-force oracles on random inputs.
// Each entry reports the relative error of one objective.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mbmelgan/losses.hpp"
#include "mbmelgan/pqmf.hpp"
#include "mbmelgan/signals.hpp"
#include "oracles.hpp"

namespace losscases {

struct Outcome {
  std::string name;
  double relative_error;
};

inline std::vector<double> noise(std::size_t n, std::mt19937_64& rng, double sd = 0.3) {
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<double> flat(const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

inline std::vector<oracle::Res> to_res(const std::vector<mbmelgan::StftResolution>& rs) {
  std::vector<oracle::Res> out;
  for (const auto& r : rs) out.push_back({r.fft_size, r.window_size, r.hop_size});
  return out;
}

// `length` is the full-band length; it must be a multiple of 4.
inline std::vector<Outcome> run(std::uint64_t seed, std::size_t length) {
  using namespace mbmelgan;
  std::mt19937_64 rng(seed);
  std::vector<Outcome> out;
  const LossConfig config = LossConfig::for_variant(Variant::MB);

  // GAN terms over three scales of different lengths.
  std::vector<std::vector<double>> real_s, fake_s;
  std::vector<Tensor> real_t, fake_t;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t n = 5 + 7 * k + seed % 5;
    real_s.push_back(noise(n, rng, 1.0));
    fake_s.push_back(noise(n, rng, 1.0));
    real_t.emplace_back(Shape{1, 1, n}, real_s.back());
    fake_t.emplace_back(Shape{1, 1, n}, fake_s.back());
  }
  out.push_back({"d_loss", oracle::rel_err(d_loss(real_t, fake_t).item(),
                                           oracle::d_loss(real_s, fake_s))});
  out.push_back({"g_adv_loss", oracle::rel_err(g_adv_loss(fake_t).item(), oracle::g_adv(fake_s))});

  std::vector<std::vector<std::vector<double>>> rf(3), ff(3);
  std::vector<std::vector<Tensor>> rft(3), fft(3);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 6; ++i) {
      const std::size_t c = 1 + i, t = 3 + k + i;
      rf[k].push_back(noise(c * t, rng, 1.0));
      ff[k].push_back(noise(c * t, rng, 1.0));
      rft[k].emplace_back(Shape{1, c, t}, rf[k].back());
      fft[k].emplace_back(Shape{1, c, t}, ff[k].back());
    }
  out.push_back({"feature_matching_loss", oracle::rel_err(feature_matching_loss(rft, fft).item(),
                                                          oracle::feature_matching(rf, ff))});

  const auto real = noise(length, rng);
  const auto fake = noise(length, rng);
  const Tensor rt({1, 1, length}, real), ft({1, 1, length}, fake);
  for (const auto& r : config.full_band_resolutions) {
    const auto a = oracle::stft_mag(real, r.fft_size, r.window_size, r.hop_size, 1e-7);
    const auto b = oracle::stft_mag(fake, r.fft_size, r.window_size, r.hop_size, 1e-7);
    const std::string tag = "@" + std::to_string(r.fft_size);
    out.push_back({"spectral_convergence" + tag,
                   oracle::rel_err(spectral_convergence_loss(rt, ft, r).item(),
                                   oracle::spectral_convergence(a, b))});
    out.push_back({"log_magnitude" + tag, oracle::rel_err(log_mag_loss(rt, ft, r).item(),
                                                          oracle::log_mag(a, b))});
  }
  const double full_ref =
      oracle::multi_res_stft({real}, {fake}, to_res(config.full_band_resolutions));
  out.push_back({"multi_res_stft_loss",
                 oracle::rel_err(multi_res_stft_loss(rt, ft, config.full_band_resolutions).item(),
                                 full_ref)});

  std::vector<std::vector<double>> rs, fs;
  for (std::size_t k = 0; k < 4; ++k) {
    rs.push_back(noise(length / 4, rng));
    fs.push_back(noise(length / 4, rng));
  }
  const Tensor rst({1, 4, length / 4}, flat(rs)), fst({1, 4, length / 4}, flat(fs));
  const double sub_ref = oracle::multi_res_stft(rs, fs, to_res(config.sub_band_resolutions));
  out.push_back({"combined_mb_stft_loss",
                 oracle::rel_err(combined_mb_stft_loss(rt, ft, rst, fst, config, 4).item(),
                                 0.5 * (full_ref + sub_ref))});
  return out;
}

}  // namespace losscases
