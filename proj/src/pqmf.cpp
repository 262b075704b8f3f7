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

#include "mbmelgan/pqmf.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "mbmelgan/error.hpp"

namespace mbmelgan {

namespace {

constexpr double kPi = std::numbers::pi;

void check_bands(const PqmfBank& bank, const SubBands& bands) {
  if (bands.size() != bank.num_bands) {
    throw ShapeError("pqmf: expected " + std::to_string(bank.num_bands) + " bands, got " +
                     std::to_string(bands.size()));
  }
  for (const auto& b : bands) {
    if (b.size() != bands.front().size()) {
      throw ShapeError("pqmf: ragged band lengths (" + std::to_string(bands.front().size()) +
                       " vs " + std::to_string(b.size()) + ")");
    }
  }
}

}  // namespace

std::vector<double> kaiser_window(std::size_t length, double beta) {
  std::vector<double> w(length, 1.0);
  if (length < 2) return w;
  const double denom = std::cyl_bessel_i(0.0, beta);
  for (std::size_t n = 0; n < length; ++n) {
    const double r = 2.0 * static_cast<double>(n) / static_cast<double>(length - 1) - 1.0;
    w[n] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
  }
  return w;
}

std::vector<double> pqmf_prototype(std::size_t taps, double cutoff_ratio, double kaiser_beta) {
  const double wc = kPi * cutoff_ratio;
  const double center = (static_cast<double>(taps) - 1.0) / 2.0;
  const auto window = kaiser_window(taps, kaiser_beta);
  std::vector<double> h(taps);
  for (std::size_t n = 0; n < taps; ++n) {
    const double m = static_cast<double>(n) - center;
    const double ideal = m == 0.0 ? wc / kPi : std::sin(wc * m) / (kPi * m);
    h[n] = ideal * window[n];
  }
  return h;
}

PqmfBank pqmf_from_prototype(std::size_t num_bands, std::vector<double> prototype,
                             double kaiser_beta, double cutoff_ratio) {
  if (num_bands < 2) throw ConfigError("pqmf: num_bands must be >= 2");
  if (prototype.empty() || prototype.size() % 2 != 0) {
    throw ConfigError("pqmf: taps must be even and positive, got " +
                      std::to_string(prototype.size()));
  }
  PqmfBank bank;
  bank.num_bands = num_bands;
  bank.taps = prototype.size();
  bank.kaiser_beta = kaiser_beta;
  bank.cutoff_ratio = cutoff_ratio;
  bank.prototype = std::move(prototype);
  const double center = (static_cast<double>(bank.taps) - 1.0) / 2.0;
  const double b = static_cast<double>(num_bands);
  bank.analysis.assign(num_bands, std::vector<double>(bank.taps));
  bank.synthesis.assign(num_bands, std::vector<double>(bank.taps));
  for (std::size_t k = 0; k < num_bands; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t n = 0; n < bank.taps; ++n) {
      const double phase = (2.0 * static_cast<double>(k) + 1.0) * kPi / (2.0 * b) *
                           (static_cast<double>(n) - center);
      bank.analysis[k][n] = 2.0 * bank.prototype[n] * std::cos(phase + sign * kPi / 4.0);
      bank.synthesis[k][n] = 2.0 * bank.prototype[n] * std::cos(phase - sign * kPi / 4.0);
    }
  }
  return bank;
}

PqmfBank design_pqmf(const PqmfDesignOptions& options) {
  if (options.num_bands < 2) throw ConfigError("pqmf: num_bands must be >= 2");
  if (options.taps == 0 || options.taps % 2 != 0) {
    throw ConfigError("pqmf: taps must be even and positive, got " +
                      std::to_string(options.taps));
  }
  const auto build = [&](double cutoff) {
    return pqmf_from_prototype(options.num_bands,
                               pqmf_prototype(options.taps, cutoff, options.kaiser_beta),
                               options.kaiser_beta, cutoff);
  };
  const auto cost = [&](double cutoff) { return impulse_reconstruction_error(build(cutoff)); };

  const double base = 1.0 / (2.0 * static_cast<double>(options.num_bands));
  double lo = 0.5 * base;
  double hi = 1.5 * base;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = cost(c);
  double fd = cost(d);
  for (int iter = 0; iter < 80 && hi - lo > 1e-12; ++iter) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = cost(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = cost(d);
    }
  }
  PqmfBank bank = build(0.5 * (lo + hi));
  const double snr = impulse_reconstruction_snr_db(bank);
  if (!(snr >= options.min_snr_db)) {
    std::ostringstream os;
    os << "pqmf: design search reached only " << snr << " dB (cutoff ratio "
       << bank.cutoff_ratio << ", taps " << options.taps << ", bands " << options.num_bands
       << ", kaiser beta " << options.kaiser_beta << "); required " << options.min_snr_db
       << " dB";
    throw NumericError(os.str());
  }
  return bank;
}

SubBands analyze(const PqmfBank& bank, std::span<const double> x) {
  if (x.empty()) throw ShapeError("pqmf analyze: empty input");
  const std::size_t nb = bank.num_bands;
  const std::size_t frames = (x.size() + nb - 1) / nb;
  const auto len = static_cast<std::ptrdiff_t>(x.size());
  SubBands out(nb, std::vector<double>(frames, 0.0));
  for (std::size_t m = 0; m < frames; ++m) {
    const auto base = static_cast<std::ptrdiff_t>(m * nb);
    const std::size_t n_hi = std::min<std::size_t>(bank.taps, static_cast<std::size_t>(base) + 1);
    for (std::size_t n = 0; n < n_hi; ++n) {
      const auto idx = base - static_cast<std::ptrdiff_t>(n);
      if (idx >= len) continue;
      const double xv = x[static_cast<std::size_t>(idx)];
      for (std::size_t k = 0; k < nb; ++k) out[k][m] += bank.analysis[k][n] * xv;
    }
  }
  return out;
}

SubBands analyze_direct(const PqmfBank& bank, std::span<const double> x) {
  if (x.empty()) throw ShapeError("pqmf analyze: empty input");
  const std::size_t nb = bank.num_bands;
  const std::size_t frames = (x.size() + nb - 1) / nb;
  std::vector<double> padded(x.begin(), x.end());
  padded.resize(frames * nb, 0.0);
  SubBands out(nb, std::vector<double>(frames));
  std::vector<double> full(padded.size());
  for (std::size_t k = 0; k < nb; ++k) {
    for (std::size_t t = 0; t < padded.size(); ++t) {
      double acc = 0.0;
      for (std::size_t n = 0; n < bank.taps && n <= t; ++n) acc += bank.analysis[k][n] * padded[t - n];
      full[t] = acc;
    }
    for (std::size_t m = 0; m < frames; ++m) out[k][m] = full[m * nb];
  }
  return out;
}

std::vector<double> synthesize(const PqmfBank& bank, const SubBands& bands,
                               std::size_t advance) {
  check_bands(bank, bands);
  const std::size_t nb = bank.num_bands;
  const std::size_t frames = bands.front().size();
  const double gain = static_cast<double>(nb);
  std::vector<double> out(frames * nb, 0.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    const std::size_t tp = t + advance;
    const std::size_t m_hi = std::min(tp / nb, frames == 0 ? 0 : frames - 1);
    const std::size_t m_lo = tp + 1 > bank.taps ? (tp + 1 - bank.taps + nb - 1) / nb : 0;
    double acc = 0.0;
    for (std::size_t m = m_lo; m <= m_hi && m < frames; ++m) {
      const std::size_t j = tp - m * nb;
      for (std::size_t k = 0; k < nb; ++k) acc += bands[k][m] * bank.synthesis[k][j];
    }
    out[t] = gain * acc;
  }
  return out;
}

std::vector<double> synthesize_direct(const PqmfBank& bank, const SubBands& bands,
                                      std::size_t advance) {
  check_bands(bank, bands);
  const std::size_t nb = bank.num_bands;
  const std::size_t frames = bands.front().size();
  const std::size_t full_len = frames * nb + bank.taps - 1;
  std::vector<double> full(full_len, 0.0);
  std::vector<double> up(frames * nb);
  for (std::size_t k = 0; k < nb; ++k) {
    std::fill(up.begin(), up.end(), 0.0);
    for (std::size_t m = 0; m < frames; ++m) up[m * nb] = static_cast<double>(nb) * bands[k][m];
    for (std::size_t t = 0; t < full_len; ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j < bank.taps; ++j) {
        if (j > t || t - j >= up.size()) continue;
        acc += bank.synthesis[k][j] * up[t - j];
      }
      full[t] += acc;
    }
  }
  std::vector<double> out(frames * nb, 0.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (t + advance < full_len) out[t] = full[t + advance];
  }
  return out;
}

double impulse_reconstruction_error(const PqmfBank& bank) {
  const std::size_t nb = bank.num_bands;
  const std::size_t length = ((2 * bank.taps + nb) / nb + 1) * nb;
  double err = 0.0;
  for (std::size_t phase = 0; phase < nb; ++phase) {
    std::vector<double> x(length, 0.0);
    x[phase] = 1.0;
    const auto y = synthesize(bank, analyze(bank, x), bank.delay());
    for (std::size_t n = 0; n < length; ++n) err += (y[n] - x[n]) * (y[n] - x[n]);
  }
  return err;
}

double impulse_reconstruction_snr_db(const PqmfBank& bank) {
  return 10.0 * std::log10(static_cast<double>(bank.num_bands) /
                           impulse_reconstruction_error(bank));
}

double round_trip_snr_db(const PqmfBank& bank, std::span<const double> signal) {
  if (signal.empty()) throw ShapeError("pqmf round trip: empty input");
  std::vector<double> x(signal.begin(), signal.end());
  x.resize(x.size() + bank.taps, 0.0);
  const auto y = synthesize(bank, analyze(bank, x), bank.delay());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t n = 0; n < signal.size(); ++n) {
    num += signal[n] * signal[n];
    den += (y[n] - signal[n]) * (y[n] - signal[n]);
  }
  return 10.0 * std::log10(num / den);
}

double stopband_attenuation_db(const PqmfBank& bank, std::size_t grid) {
  const std::size_t nb = bank.num_bands;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nb; ++k) {
    double pass_peak = 0.0;
    double stop_peak = 0.0;
    for (std::size_t i = 0; i <= grid; ++i) {
      const double w = kPi * static_cast<double>(i) / static_cast<double>(grid);
      std::complex<double> h = 0.0;
      for (std::size_t n = 0; n < bank.taps; ++n) {
        h += bank.analysis[k][n] * std::polar(1.0, -w * static_cast<double>(n));
      }
      const double mag = std::abs(h);
      const double band = w * static_cast<double>(nb) / kPi;  // position in band units
      if (band >= static_cast<double>(k) && band <= static_cast<double>(k + 1)) {
        pass_peak = std::max(pass_peak, mag);
      }
      if (band < static_cast<double>(k) - 1.0 || band > static_cast<double>(k) + 2.0) {
        stop_peak = std::max(stop_peak, mag);
      }
    }
    worst = std::min(worst, 20.0 * std::log10(pass_peak / stop_peak));
  }
  return worst;
}

Tensor pqmf_synthesize(const PqmfBank& bank, const Tensor& bands, std::size_t advance) {
  const bool batched = bands.rank() == 3;
  if (bands.rank() != 2 && !batched) {
    throw ShapeError("pqmf_synthesize: expected [nb x T] or [B x nb x T], got " +
                     shape_str(bands.shape()));
  }
  const std::size_t batch = batched ? bands.size(0) : 1;
  const std::size_t nb = bands.size(batched ? 1 : 0);
  const std::size_t frames = bands.size(batched ? 2 : 1);
  if (nb != bank.num_bands) {
    throw ShapeError("pqmf_synthesize: band dimension is " + std::to_string(nb) +
                     ", bank has " + std::to_string(bank.num_bands));
  }
  const std::size_t len = nb * frames;
  const double gain = static_cast<double>(nb);
  const auto x = bands.data();
  std::vector<double> out(batch * len, 0.0);
  // Only the synthesis filters are captured; the bank itself may go away.
  auto filters = bank.synthesis;
  const std::size_t taps = bank.taps;
  const auto for_each_tap = [=](std::size_t t, auto&& fn) {
    const std::size_t tp = t + advance;
    const std::size_t m_lo = tp + 1 > taps ? (tp + 1 - taps + nb - 1) / nb : 0;
    for (std::size_t m = m_lo; m <= tp / nb && m < frames; ++m) fn(m, tp - m * nb);
  };
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x.data() + b * nb * frames;
    for (std::size_t t = 0; t < len; ++t) {
      double acc = 0.0;
      for_each_tap(t, [&](std::size_t m, std::size_t j) {
        for (std::size_t k = 0; k < nb; ++k) acc += xb[k * frames + m] * filters[k][j];
      });
      out[b * len + t] = gain * acc;
    }
  }
  Shape shape = batched ? Shape{batch, 1, len} : Shape{1, len};
  return make_op_result(
      std::move(shape), std::move(out), "pqmf_synthesize", {bands},
      [=, filters = std::move(filters)](detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t b = 0; b < batch; ++b) {
          double* gb = g.data() + b * nb * frames;
          for (std::size_t t = 0; t < len; ++t) {
            const double gy = gain * self.grad[b * len + t];
            if (gy == 0.0) continue;
            for_each_tap(t, [&](std::size_t m, std::size_t j) {
              for (std::size_t k = 0; k < nb; ++k) gb[k * frames + m] += gy * filters[k][j];
            });
          }
        }
      });
}

}  // namespace mbmelgan
