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

#include "mbmelgan/losses.hpp"

#include <cmath>

#include "mbmelgan/error.hpp"
#include "mbmelgan/ops.hpp"
#include "stft_core.hpp"

namespace mbmelgan {

namespace {

std::string num(std::size_t v) { return std::to_string(v); }

struct Rows {
  std::size_t rows = 0;
  std::size_t length = 0;
};

Rows rows_of(const Tensor& t, const char* what) {
  if (t.rank() < 1 || t.rank() > 3) {
    throw ShapeError(std::string(what) + ": expected [L], [N x L] or [B x C x L], got " +
                     shape_str(t.shape()));
  }
  const std::size_t length = t.size(t.rank() - 1);
  return {t.numel() / std::max<std::size_t>(length, 1), length};
}

void same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

void check_scales(std::size_t a, std::size_t b, const char* what) {
  if (a != b || a == 0) {
    throw ShapeError(std::string(what) + ": scale count mismatch (" + num(a) + " vs " + num(b) +
                     ")");
  }
}

}  // namespace

std::string loss_mode_name(LossMode mode) {
  switch (mode) {
    case LossMode::FeatureMatching: return "feature_matching";
    case LossMode::StftFb: return "stft_fb";
    case LossMode::StftMb: return "stft_mb";
  }
  return "stft_mb";
}

LossMode parse_loss_mode(const std::string& name) {
  if (name == "feature_matching") return LossMode::FeatureMatching;
  if (name == "stft_fb") return LossMode::StftFb;
  if (name == "stft_mb") return LossMode::StftMb;
  throw ConfigError("unknown loss mode '" + name +
                    "' (expected feature_matching, stft_fb or stft_mb)");
}

LossConfig LossConfig::for_variant(Variant variant) {
  LossConfig c;
  switch (variant) {
    case Variant::MB:
      c.mode = LossMode::StftMb;
      c.lambda = 2.5;
      break;
    case Variant::FB:
      c.mode = LossMode::StftFb;
      c.lambda = 2.5;
      break;
    case Variant::BASIC:
      c.mode = LossMode::FeatureMatching;
      c.lambda = 10.0;
      break;
  }
  return c;
}

void LossConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("loss: lambda must be a finite non-negative number");
  }
  if (full_band_resolutions.size() != 3 || sub_band_resolutions.size() != 3) {
    throw ConfigError("loss: exactly 3 full-band and 3 sub-band resolutions are required (got " +
                      num(full_band_resolutions.size()) + " and " +
                      num(sub_band_resolutions.size()) + ")");
  }
  for (const auto& r : full_band_resolutions) r.validate();
  for (const auto& r : sub_band_resolutions) r.validate();
}

Tensor stft_magnitude_op(const Tensor& signals, const StftResolution& res, double floor) {
  const Rows r = rows_of(signals, "stft_magnitude");
  if (r.length == 0) throw ShapeError("stft_magnitude: empty signal");
  auto layout = std::make_shared<const stft::Layout>(stft::make_layout(res));
  const std::size_t frames = layout->frames(r.length);
  const std::size_t bins = layout->bins;
  const std::size_t per_row = frames * bins;
  auto spec = std::make_shared<std::vector<std::complex<double>>>(r.rows * per_row);
  const auto x = signals.data();
  for (std::size_t i = 0; i < r.rows; ++i) {
    stft::forward(*layout, x.data() + i * r.length, r.length, spec->data() + i * per_row);
  }
  std::vector<double> mag(spec->size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::max(std::abs((*spec)[i]), floor);
  return make_op_result(
      {r.rows, frames, bins}, std::move(mag), "stft_magnitude", {signals},
      [layout, spec, r, per_row, floor](detail::Node& self) {
        auto& gx = self.inputs[0]->grad_buffer();
        std::vector<std::complex<double>> gspec(per_row);
        for (std::size_t i = 0; i < r.rows; ++i) {
          for (std::size_t j = 0; j < per_row; ++j) {
            const std::complex<double> s = (*spec)[i * per_row + j];
            const double a = std::abs(s);
            // Floored (or exactly zero) magnitudes pass no gradient.
            gspec[j] = a > floor ? self.grad[i * per_row + j] * s / a : 0.0;
          }
          stft::adjoint(*layout, gspec.data(), r.length, gx.data() + i * r.length);
        }
      });
}

Tensor spectral_convergence(const Tensor& mag_real, const Tensor& mag_fake) {
  same_shape(mag_real, mag_fake, "spectral_convergence");
  if (mag_real.rank() != 3) {
    throw ShapeError("spectral_convergence: expected [rows x frames x bins], got " +
                     shape_str(mag_real.shape()));
  }
  const std::size_t rows = mag_real.size(0);
  const std::size_t per_row = mag_real.numel() / rows;
  const auto r = mag_real.data();
  const auto f = mag_fake.data();
  std::vector<double> diff_norm(rows);
  std::vector<double> ref_norm(rows);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double dd = 0.0;
    double rr = 0.0;
    for (std::size_t j = 0; j < per_row; ++j) {
      const double d = r[i * per_row + j] - f[i * per_row + j];
      dd += d * d;
      rr += r[i * per_row + j] * r[i * per_row + j];
    }
    if (rr == 0.0) {
      throw NumericError("spectral_convergence: reference row " + num(i) +
                         " has zero Frobenius norm");
    }
    diff_norm[i] = std::sqrt(dd);
    ref_norm[i] = std::sqrt(rr);
    total += diff_norm[i] / ref_norm[i];
  }
  const double n = static_cast<double>(rows);
  return make_op_result(
      Shape{1}, {total / n}, "spectral_convergence", {mag_real, mag_fake},
      [rows, per_row, n, diff_norm = std::move(diff_norm),
       ref_norm = std::move(ref_norm)](detail::Node& self) {
        auto& nr = *self.inputs[0];
        auto& nf = *self.inputs[1];
        const double g = self.grad[0] / n;
        double* gr = nr.requires_grad ? nr.grad_buffer().data() : nullptr;
        double* gf = nf.requires_grad ? nf.grad_buffer().data() : nullptr;
        for (std::size_t i = 0; i < rows; ++i) {
          const double dn = diff_norm[i];
          const double rn = ref_norm[i];
          const double ratio = dn / rn;
          for (std::size_t j = 0; j < per_row; ++j) {
            const std::size_t k = i * per_row + j;
            const double d = nr.data[k] - nf.data[k];
            // The norm of a zero difference takes the zero subgradient.
            const double dd = dn > 0.0 ? d / (dn * rn) : 0.0;
            if (gf) gf[k] -= g * dd;
            if (gr) gr[k] += g * (dd - ratio * nr.data[k] / (rn * rn));
          }
        }
      });
}

Tensor log_magnitude_distance(const Tensor& mag_real, const Tensor& mag_fake) {
  same_shape(mag_real, mag_fake, "log_magnitude_distance");
  return mean_abs_error(log_op(mag_real), log_op(mag_fake));
}

Tensor spectral_convergence_loss(const Tensor& real, const Tensor& fake,
                                 const StftResolution& res) {
  same_shape(real, fake, "spectral_convergence_loss");
  return spectral_convergence(stft_magnitude_op(real, res), stft_magnitude_op(fake, res));
}

Tensor log_mag_loss(const Tensor& real, const Tensor& fake, const StftResolution& res) {
  same_shape(real, fake, "log_mag_loss");
  return log_magnitude_distance(stft_magnitude_op(real, res), stft_magnitude_op(fake, res));
}

Tensor stft_loss(const Tensor& real, const Tensor& fake, const StftResolution& res) {
  same_shape(real, fake, "stft_loss");
  const Tensor mr = stft_magnitude_op(real, res);
  const Tensor mf = stft_magnitude_op(fake, res);
  return add(spectral_convergence(mr, mf), log_magnitude_distance(mr, mf));
}

Tensor multi_res_stft_loss(const Tensor& real, const Tensor& fake,
                           std::span<const StftResolution> resolutions) {
  if (resolutions.empty()) throw ConfigError("multi_res_stft_loss: no resolutions");
  Tensor total;
  for (const auto& res : resolutions) {
    Tensor l = stft_loss(real, fake, res);
    total = total.defined() ? add(total, l) : l;
  }
  return scale(total, 1.0 / static_cast<double>(resolutions.size()));
}

Tensor combined_mb_stft_loss(const Tensor& real_full, const Tensor& fake_full,
                             const Tensor& real_subs, const Tensor& fake_subs,
                             const LossConfig& config, std::size_t num_bands) {
  same_shape(real_subs, fake_subs, "combined_mb_stft_loss");
  const std::size_t band_axis = real_subs.rank() == 3 ? 1 : 0;
  if (real_subs.rank() < 2 || real_subs.size(band_axis) != num_bands) {
    throw ShapeError("combined_mb_stft_loss: expected " + num(num_bands) +
                     " sub-bands, got shape " + shape_str(real_subs.shape()));
  }
  const Tensor full = multi_res_stft_loss(real_full, fake_full, config.full_band_resolutions);
  const Tensor sub = multi_res_stft_loss(real_subs, fake_subs, config.sub_band_resolutions);
  return scale(add(full, sub), 0.5);
}

Tensor d_loss(const std::vector<Tensor>& real_scores, const std::vector<Tensor>& fake_scores) {
  check_scales(real_scores.size(), fake_scores.size(), "d_loss");
  Tensor total;
  for (std::size_t k = 0; k < real_scores.size(); ++k) {
    Tensor l = add(mean_squared_error_to(real_scores[k], 1.0),
                   mean_squared_error_to(fake_scores[k], 0.0));
    total = total.defined() ? add(total, l) : l;
  }
  return total;
}

Tensor g_adv_loss(const std::vector<Tensor>& fake_scores) {
  if (fake_scores.empty()) throw ShapeError("g_adv_loss: no discriminator scales");
  Tensor total;
  for (const auto& s : fake_scores) {
    Tensor l = mean_squared_error_to(s, 1.0);
    total = total.defined() ? add(total, l) : l;
  }
  return total;
}

Tensor feature_matching_loss(const std::vector<std::vector<Tensor>>& real_features,
                             const std::vector<std::vector<Tensor>>& fake_features) {
  check_scales(real_features.size(), fake_features.size(), "feature_matching_loss");
  Tensor total;
  for (std::size_t k = 0; k < real_features.size(); ++k) {
    if (real_features[k].size() != fake_features[k].size()) {
      throw ShapeError("feature_matching_loss: scale " + num(k) + " has " +
                       num(real_features[k].size()) + " real and " +
                       num(fake_features[k].size()) + " fake feature maps");
    }
    for (std::size_t i = 0; i < real_features[k].size(); ++i) {
      if (real_features[k][i].shape() != fake_features[k][i].shape()) {
        throw ShapeError("feature_matching_loss: scale " + num(k) + " layer " + num(i) +
                         " shape mismatch " + shape_str(real_features[k][i].shape()) + " vs " +
                         shape_str(fake_features[k][i].shape()));
      }
      Tensor l = mean_abs_error(real_features[k][i], fake_features[k][i]);
      total = total.defined() ? add(total, l) : l;
    }
  }
  if (!total.defined()) throw ShapeError("feature_matching_loss: no feature maps");
  return total;
}

Tensor g_total_loss(const LossConfig& config, const Tensor& adv, const Tensor& aux) {
  if (config.mode == LossMode::FeatureMatching) return add(adv, scale(aux, config.lambda));
  return add(scale(adv, config.lambda), aux);
}

std::vector<Tensor> scores_of(const std::vector<MultiScaleDiscriminator::ScaleOutput>& out) {
  std::vector<Tensor> s;
  for (const auto& o : out) s.push_back(o.score());
  return s;
}

std::vector<std::vector<Tensor>> features_of(
    const std::vector<MultiScaleDiscriminator::ScaleOutput>& out) {
  std::vector<std::vector<Tensor>> f;
  for (const auto& o : out) f.push_back(o.features);
  return f;
}

}  // namespace mbmelgan
