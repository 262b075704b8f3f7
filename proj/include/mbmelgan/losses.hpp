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

// Training objectives: least-squares GAN terms, discriminator feature
// matching, and single/multi-resolution STFT losses over full-band and
// sub-band signals.

#include <span>
#include <string>
#include <vector>

#include "mbmelgan/dsp.hpp"
#include "mbmelgan/models.hpp"
#include "mbmelgan/tensor.hpp"

namespace mbmelgan {

enum class LossMode { FeatureMatching, StftFb, StftMb };

std::string loss_mode_name(LossMode mode);
LossMode parse_loss_mode(const std::string& name);

struct LossConfig {
  LossMode mode = LossMode::StftMb;
  double lambda = 2.5;
  std::vector<StftResolution> full_band_resolutions{
      {1024, 600, 120}, {2048, 1200, 240}, {512, 240, 50}};
  std::vector<StftResolution> sub_band_resolutions{
      {384, 150, 30}, {683, 300, 60}, {171, 60, 10}};

  // Mode and weight that go with a generator variant: MB -> combined STFT
  // loss (lambda 2.5), FB -> full-band STFT loss (2.5), BASIC -> feature
  // matching (10).
  static LossConfig for_variant(Variant variant);
  void validate() const;
  bool operator==(const LossConfig&) const = default;
};

// Differentiable floored STFT magnitude. Signals are [L], [N x L] or
// [B x C x L]; every leading index is one row. Output [rows x frames x bins].
Tensor stft_magnitude_op(const Tensor& signals, const StftResolution& res, double floor = 1e-7);

// Row-wise ||M_real - M_fake||_F / ||M_real||_F averaged over rows, for
// magnitude tensors [rows x frames x bins].
Tensor spectral_convergence(const Tensor& mag_real, const Tensor& mag_fake);
// mean |log M_real - log M_fake|.
Tensor log_magnitude_distance(const Tensor& mag_real, const Tensor& mag_fake);

Tensor spectral_convergence_loss(const Tensor& real, const Tensor& fake,
                                 const StftResolution& res);
Tensor log_mag_loss(const Tensor& real, const Tensor& fake, const StftResolution& res);
// Spectral convergence plus log-magnitude loss at one resolution.
Tensor stft_loss(const Tensor& real, const Tensor& fake, const StftResolution& res);
// Mean over resolutions of stft_loss.
Tensor multi_res_stft_loss(const Tensor& real, const Tensor& fake,
                           std::span<const StftResolution> resolutions);
// 0.5 * (full-band multi-resolution loss + sub-band multi-resolution loss);
// the sub-band term averages over bands. Sub-band tensors are
// [nb x T] or [B x nb x T].
Tensor combined_mb_stft_loss(const Tensor& real_full, const Tensor& fake_full,
                             const Tensor& real_subs, const Tensor& fake_subs,
                             const LossConfig& config, std::size_t num_bands = 4);

// sum_k mean((D_k(x) - 1)^2) + mean(D_k(G(s))^2).
Tensor d_loss(const std::vector<Tensor>& real_scores, const std::vector<Tensor>& fake_scores);
// sum_k mean((D_k(G(s)) - 1)^2).
Tensor g_adv_loss(const std::vector<Tensor>& fake_scores);
// sum_k sum_i mean|D_k^(i)(x) - D_k^(i)(G(s))| over per-scale feature lists.
Tensor feature_matching_loss(const std::vector<std::vector<Tensor>>& real_features,
                             const std::vector<std::vector<Tensor>>& fake_features);

// STFT modes: lambda * adv + aux. Feature matching: adv + lambda * aux, where
// aux is the feature-matching term.
Tensor g_total_loss(const LossConfig& config, const Tensor& adv, const Tensor& aux);

std::vector<Tensor> scores_of(const std::vector<MultiScaleDiscriminator::ScaleOutput>& out);
std::vector<std::vector<Tensor>> features_of(
    const std::vector<MultiScaleDiscriminator::ScaleOutput>& out);

}  // namespace mbmelgan
