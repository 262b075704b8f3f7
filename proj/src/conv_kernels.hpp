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

// Convolution kernels shared by the 64-bit training ops and the 32-bit
// inference engine. Each call processes one batch item laid out [C x T]
// row-major; the matrix products go through Eigen (im2col + GEMM).

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "mbmelgan/ops.hpp"

namespace mbmelgan::kernels {

inline std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

struct ConvGeometry {
  std::size_t c_in = 1;
  std::size_t c_out = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t groups = 1;
  std::size_t pad_left = 0;
  std::size_t pad_right = 0;
  PadMode pad_mode = PadMode::Zero;

  std::size_t padded_length(std::size_t t) const { return t + pad_left + pad_right; }
  std::size_t span() const { return dilation * (kernel - 1) + 1; }
  std::size_t out_length(std::size_t t) const {
    return (padded_length(t) - span()) / stride + 1;
  }
};

template <typename Real>
using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Real>
void pad_signal(const Real* x, std::size_t channels, std::size_t t, std::size_t left,
                std::size_t right, PadMode mode, Real* out) {
  const std::size_t tp = t + left + right;
  for (std::size_t c = 0; c < channels; ++c) {
    const Real* src = x + c * t;
    Real* dst = out + c * tp;
    for (std::size_t j = 0; j < tp; ++j) {
      const auto i = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(left);
      if (i >= 0 && i < static_cast<std::ptrdiff_t>(t)) {
        dst[j] = src[i];
      } else if (mode == PadMode::Reflect) {
        dst[j] = src[reflect_index(i, static_cast<std::ptrdiff_t>(t))];
      } else {
        dst[j] = Real(0);
      }
    }
  }
}

// Adjoint of pad_signal: folds a padded-domain gradient back onto the input.
template <typename Real>
void unpad_accumulate(const Real* gpad, std::size_t channels, std::size_t t,
                      std::size_t left, std::size_t right, PadMode mode, Real* gx) {
  const std::size_t tp = t + left + right;
  for (std::size_t c = 0; c < channels; ++c) {
    const Real* src = gpad + c * tp;
    Real* dst = gx + c * t;
    for (std::size_t j = 0; j < tp; ++j) {
      const auto i = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(left);
      if (i >= 0 && i < static_cast<std::ptrdiff_t>(t)) {
        dst[i] += src[j];
      } else if (mode == PadMode::Reflect) {
        dst[reflect_index(i, static_cast<std::ptrdiff_t>(t))] += src[j];
      }
    }
  }
}

template <typename Real>
void im2col(const ConvGeometry& g, const Real* xp, std::size_t tp, std::size_t group,
            std::size_t t_out, Real* cols) {
  const std::size_t cin_g = g.c_in / g.groups;
  for (std::size_t ci = 0; ci < cin_g; ++ci) {
    const Real* row = xp + (group * cin_g + ci) * tp;
    for (std::size_t k = 0; k < g.kernel; ++k) {
      const Real* src = row + k * g.dilation;
      Real* dst = cols + (ci * g.kernel + k) * t_out;
      if (g.stride == 1) {
        for (std::size_t o = 0; o < t_out; ++o) dst[o] = src[o];
      } else {
        for (std::size_t o = 0; o < t_out; ++o) dst[o] = src[o * g.stride];
      }
    }
  }
}

template <typename Real>
void col2im_accumulate(const ConvGeometry& g, const Real* cols, std::size_t group,
                       std::size_t t_out, std::size_t tp, Real* gxp) {
  const std::size_t cin_g = g.c_in / g.groups;
  for (std::size_t ci = 0; ci < cin_g; ++ci) {
    Real* row = gxp + (group * cin_g + ci) * tp;
    for (std::size_t k = 0; k < g.kernel; ++k) {
      Real* dst = row + k * g.dilation;
      const Real* src = cols + (ci * g.kernel + k) * t_out;
      for (std::size_t o = 0; o < t_out; ++o) dst[o * g.stride] += src[o];
    }
  }
}

// y [c_out x t_out] = conv(x [c_in x t]); bias may be null.
template <typename Real>
void conv1d_forward(const ConvGeometry& g, const Real* x, std::size_t t, const Real* w,
                    const Real* bias, Real* y) {
  using Map = Eigen::Map<RowMat<Real>>;
  using CMap = Eigen::Map<const RowMat<Real>>;
  const std::size_t tp = g.padded_length(t);
  const std::size_t t_out = g.out_length(t);
  const std::size_t cin_g = g.c_in / g.groups;
  const std::size_t cout_g = g.c_out / g.groups;
  const std::size_t rows = cin_g * g.kernel;

  std::vector<Real> padded;
  const Real* xp = x;
  if (g.pad_left || g.pad_right) {
    padded.resize(g.c_in * tp);
    pad_signal(x, g.c_in, t, g.pad_left, g.pad_right, g.pad_mode, padded.data());
    xp = padded.data();
  }
  const bool pointwise = g.kernel == 1 && g.stride == 1;
  std::vector<Real> cols(pointwise ? 0 : rows * t_out);
  for (std::size_t grp = 0; grp < g.groups; ++grp) {
    const Real* col_ptr;
    if (pointwise) {
      col_ptr = xp + grp * cin_g * tp;
    } else {
      im2col(g, xp, tp, grp, t_out, cols.data());
      col_ptr = cols.data();
    }
    CMap wg(w + grp * cout_g * rows, static_cast<Eigen::Index>(cout_g),
            static_cast<Eigen::Index>(rows));
    CMap cg(col_ptr, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t_out));
    Map yg(y + grp * cout_g * t_out, static_cast<Eigen::Index>(cout_g),
           static_cast<Eigen::Index>(t_out));
    yg.noalias() = wg * cg;
  }
  if (bias) {
    for (std::size_t co = 0; co < g.c_out; ++co) {
      Real* row = y + co * t_out;
      for (std::size_t o = 0; o < t_out; ++o) row[o] += bias[co];
    }
  }
}

// Accumulates gradients; any of gx, gw, gb may be null.
template <typename Real>
void conv1d_backward(const ConvGeometry& g, const Real* x, std::size_t t, const Real* w,
                     const Real* gy, Real* gx, Real* gw, Real* gb) {
  using Map = Eigen::Map<RowMat<Real>>;
  using CMap = Eigen::Map<const RowMat<Real>>;
  const std::size_t tp = g.padded_length(t);
  const std::size_t t_out = g.out_length(t);
  const std::size_t cin_g = g.c_in / g.groups;
  const std::size_t cout_g = g.c_out / g.groups;
  const std::size_t rows = cin_g * g.kernel;
  const bool padded_input = g.pad_left || g.pad_right;

  if (gb) {
    for (std::size_t co = 0; co < g.c_out; ++co) {
      const Real* row = gy + co * t_out;
      Real acc = 0;
      for (std::size_t o = 0; o < t_out; ++o) acc += row[o];
      gb[co] += acc;
    }
  }

  std::vector<Real> padded;
  const Real* xp = x;
  if (gw && padded_input) {
    padded.resize(g.c_in * tp);
    pad_signal(x, g.c_in, t, g.pad_left, g.pad_right, g.pad_mode, padded.data());
    xp = padded.data();
  }
  std::vector<Real> gpad;
  Real* gxp = gx;
  if (gx && padded_input) {
    gpad.assign(g.c_in * tp, Real(0));
    gxp = gpad.data();
  }
  const bool pointwise = g.kernel == 1 && g.stride == 1;
  std::vector<Real> cols(pointwise ? 0 : rows * t_out);
  std::vector<Real> dcols(pointwise || !gx ? 0 : rows * t_out);

  for (std::size_t grp = 0; grp < g.groups; ++grp) {
    CMap gyg(gy + grp * cout_g * t_out, static_cast<Eigen::Index>(cout_g),
             static_cast<Eigen::Index>(t_out));
    CMap wg(w + grp * cout_g * rows, static_cast<Eigen::Index>(cout_g),
            static_cast<Eigen::Index>(rows));
    if (gw) {
      const Real* col_ptr;
      if (pointwise) {
        col_ptr = xp + grp * cin_g * tp;
      } else {
        im2col(g, xp, tp, grp, t_out, cols.data());
        col_ptr = cols.data();
      }
      CMap cg(col_ptr, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t_out));
      Map gwg(gw + grp * cout_g * rows, static_cast<Eigen::Index>(cout_g),
              static_cast<Eigen::Index>(rows));
      gwg.noalias() += gyg * cg.transpose();
    }
    if (gx) {
      if (pointwise) {
        Map gxg(gxp + grp * cin_g * tp, static_cast<Eigen::Index>(cin_g),
                static_cast<Eigen::Index>(tp));
        gxg.noalias() += wg.transpose() * gyg;
      } else {
        Map dc(dcols.data(), static_cast<Eigen::Index>(rows),
               static_cast<Eigen::Index>(t_out));
        dc.noalias() = wg.transpose() * gyg;
        col2im_accumulate(g, dcols.data(), grp, t_out, tp, gxp);
      }
    }
  }
  if (gx && gxp != gx) {
    unpad_accumulate(gxp, g.c_in, t, g.pad_left, g.pad_right, g.pad_mode, gx);
  }
}

struct TransposedGeometry {
  std::size_t c_in = 1;
  std::size_t c_out = 1;
  std::size_t stride = 1;
  std::size_t kernel = 2;
  std::size_t padding = 1;

  std::size_t out_length(std::size_t t) const { return stride * t; }
};

// Weight layout [c_out x c_in x K] -> matrix [(c_out*K) x c_in].
template <typename Real>
RowMat<Real> transposed_weight_matrix(const TransposedGeometry& g, const Real* w) {
  RowMat<Real> m(static_cast<Eigen::Index>(g.c_out * g.kernel),
                 static_cast<Eigen::Index>(g.c_in));
  for (std::size_t co = 0; co < g.c_out; ++co)
    for (std::size_t ci = 0; ci < g.c_in; ++ci)
      for (std::size_t k = 0; k < g.kernel; ++k)
        m(static_cast<Eigen::Index>(co * g.kernel + k), static_cast<Eigen::Index>(ci)) =
            w[(co * g.c_in + ci) * g.kernel + k];
  return m;
}

// y[co, i*s + k - p] += sum_ci w[co, ci, k] * x[ci, i], cropped to [0, s*t).
template <typename Real>
void conv_transpose1d_forward(const TransposedGeometry& g, const RowMat<Real>& wmat,
                              const Real* x, std::size_t t, const Real* bias, Real* y) {
  using CMap = Eigen::Map<const RowMat<Real>>;
  const std::size_t t_out = g.out_length(t);
  CMap xm(x, static_cast<Eigen::Index>(g.c_in), static_cast<Eigen::Index>(t));
  RowMat<Real> cols = wmat * xm;
  for (std::size_t co = 0; co < g.c_out; ++co) {
    Real* row = y + co * t_out;
    const Real b = bias ? bias[co] : Real(0);
    for (std::size_t o = 0; o < t_out; ++o) row[o] = b;
    for (std::size_t k = 0; k < g.kernel; ++k) {
      const Real* src = cols.data() + (co * g.kernel + k) * t;
      for (std::size_t i = 0; i < t; ++i) {
        const auto idx = static_cast<std::ptrdiff_t>(i * g.stride + k) -
                         static_cast<std::ptrdiff_t>(g.padding);
        if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(t_out)) row[idx] += src[i];
      }
    }
  }
}

template <typename Real>
void conv_transpose1d_backward(const TransposedGeometry& g, const RowMat<Real>& wmat,
                               const Real* x, std::size_t t, const Real* gy, Real* gx,
                               RowMat<Real>* gwmat, Real* gb) {
  using CMap = Eigen::Map<const RowMat<Real>>;
  using Map = Eigen::Map<RowMat<Real>>;
  const std::size_t t_out = g.out_length(t);
  RowMat<Real> dcols(static_cast<Eigen::Index>(g.c_out * g.kernel),
                     static_cast<Eigen::Index>(t));
  for (std::size_t co = 0; co < g.c_out; ++co) {
    const Real* row = gy + co * t_out;
    if (gb) {
      Real acc = 0;
      for (std::size_t o = 0; o < t_out; ++o) acc += row[o];
      gb[co] += acc;
    }
    for (std::size_t k = 0; k < g.kernel; ++k) {
      Real* dst = dcols.data() + (co * g.kernel + k) * t;
      for (std::size_t i = 0; i < t; ++i) {
        const auto idx = static_cast<std::ptrdiff_t>(i * g.stride + k) -
                         static_cast<std::ptrdiff_t>(g.padding);
        dst[i] = (idx >= 0 && idx < static_cast<std::ptrdiff_t>(t_out)) ? row[idx] : Real(0);
      }
    }
  }
  if (gx) {
    Map gxm(gx, static_cast<Eigen::Index>(g.c_in), static_cast<Eigen::Index>(t));
    gxm.noalias() += wmat.transpose() * dcols;
  }
  if (gwmat) {
    CMap xm(x, static_cast<Eigen::Index>(g.c_in), static_cast<Eigen::Index>(t));
    gwmat->noalias() += dcols * xm.transpose();
  }
}

}  // namespace mbmelgan::kernels
