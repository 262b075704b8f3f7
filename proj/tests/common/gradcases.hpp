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

// Finite-difference gradient cases for every differentiable operation and for
// the tiny multi-band generator under the combined STFT loss. Shared by the
// unit tests and the acceptance runner.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mbmelgan/gradcheck.hpp"
#include "mbmelgan/losses.hpp"
#include "mbmelgan/models.hpp"
#include "mbmelgan/ops.hpp"
#include "mbmelgan/pqmf.hpp"
#include "mbmelgan/signals.hpp"

namespace gradcases {

using mbmelgan::Tensor;

inline Tensor randn(mbmelgan::Shape shape, std::mt19937_64& rng, double stddev = 1.0,
                    double mean = 0.0) {
  std::normal_distribution<double> d(mean, stddev);
  std::vector<double> v(mbmelgan::shape_numel(shape));
  for (auto& x : v) x = d(rng);
  return Tensor(std::move(shape), std::move(v), true);
}

// Fixed random projection so that every output element reaches the loss with
// a distinct weight.
inline Tensor project(const Tensor& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Tensor w = randn(y.shape(), rng);
  w.set_requires_grad(false);
  // sum(y * w) through differentiable ops: (y + w)^2 - y^2 - w^2 = 2yw.
  const Tensor a = mbmelgan::mean_squared_error_to(mbmelgan::add(y, w), 0.0);
  const Tensor b = mbmelgan::mean_squared_error_to(y, 0.0);
  return mbmelgan::add(a, mbmelgan::scale(b, -1.0));
}

struct Case {
  std::string name;
  std::function<mbmelgan::GradCheckResult(std::uint64_t seed)> run;
};

inline std::vector<Case> op_cases() {
  using namespace mbmelgan;
  std::vector<Case> cases;
  const auto conv_case = [](std::string name, std::size_t batch, std::size_t c_in,
                            std::size_t c_out, std::size_t k, Conv1dOptions o, std::size_t t) {
    return Case{name, [=](std::uint64_t seed) {
                  std::mt19937_64 rng(seed);
                  Shape xs = batch ? Shape{batch, c_in, t} : Shape{c_in, t};
                  Tensor x = randn(xs, rng);
                  Tensor w = randn({c_out, c_in / o.groups, k}, rng, 0.5);
                  Tensor b = randn({c_out}, rng);
                  return finite_diff_check(
                      [=] { return project(conv1d(x, w, b, o), seed); }, {x, w, b});
                }};
  };
  cases.push_back(conv_case("conv1d", 0, 3, 4, 3, {}, 11));
  cases.push_back(conv_case("conv1d_batched_strided", 2, 4, 6, 5,
                            {.stride = 2, .dilation = 1, .groups = 2, .padding = 2}, 13));
  cases.push_back(conv_case("conv1d_dilated_reflect", 0, 2, 3, 3,
                            {.stride = 1, .dilation = 3, .groups = 1, .padding = -1,
                             .pad_mode = PadMode::Reflect},
                            12));
  cases.push_back(conv_case("conv1d_grouped_strided", 1, 8, 8, 9,
                            {.stride = 4, .dilation = 1, .groups = 4, .padding = 4}, 21));
  for (std::size_t stride : {2, 5}) {
    cases.push_back({"conv_transpose1d_s" + std::to_string(stride), [stride](std::uint64_t seed) {
                       std::mt19937_64 rng(seed);
                       Tensor x = randn({2, 3, 5}, rng);
                       Tensor w = randn({4, 3, 2 * stride}, rng, 0.5);
                       Tensor b = randn({4}, rng);
                       return finite_diff_check(
                           [=] { return project(conv_transpose1d(x, w, b, stride), seed); },
                           {x, w, b});
                     }});
  }
  cases.push_back({"leaky_relu", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor x = randn({3, 7}, rng);
                     return finite_diff_check([=] { return project(leaky_relu(x, 0.2), seed); },
                                              {x});
                   }});
  cases.push_back({"tanh", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor x = randn({2, 9}, rng);
                     return finite_diff_check([=] { return project(tanh_act(x), seed); }, {x});
                   }});
  cases.push_back({"avg_pool1d", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor x = randn({2, 2, 11}, rng);
                     return finite_diff_check(
                         [=] { return project(avg_pool1d(x, 4, 2, 1), seed); }, {x});
                   }});
  cases.push_back({"weight_norm", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor g = randn({3}, rng);
                     Tensor v = randn({3, 2, 4}, rng);
                     return finite_diff_check([=] { return project(weight_norm(g, v), seed); },
                                              {g, v});
                   }});
  cases.push_back({"add_scale_reshape", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor a = randn({4, 3}, rng);
                     Tensor b = randn({4, 3}, rng);
                     return finite_diff_check(
                         [=] { return project(scale(add(a, b), 1.7).reshape({2, 6}), seed); },
                         {a, b});
                   }});
  cases.push_back({"sum_mean", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor a = randn({5, 3}, rng);
                     return finite_diff_check(
                         [=] {
                           return add(scale(sum(tanh_act(a)), 0.3), mean(leaky_relu(a, 0.1)));
                         },
                         {a});
                   }});
  cases.push_back({"log", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor a = randn({6}, rng, 0.3, 2.0);
                     return finite_diff_check([=] { return project(log_op(a), seed); }, {a});
                   }});
  cases.push_back({"mean_squared_error_to", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor a = randn({3, 4}, rng);
                     return finite_diff_check([=] { return mean_squared_error_to(a, 1.0); }, {a});
                   }});
  cases.push_back({"mean_abs_error", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor a = randn({3, 4}, rng);
                     Tensor b = randn({3, 4}, rng);
                     return finite_diff_check([=] { return mean_abs_error(a, b); }, {a, b});
                   }});
  cases.push_back({"stft_magnitude", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor x = randn({2, 1, 150}, rng, 0.3);
                     return finite_diff_check(
                         [=] { return project(stft_magnitude_op(x, {64, 40, 16}), seed); }, {x});
                   }});
  cases.push_back({"spectral_convergence", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor r = randn({2, 3, 5}, rng, 0.2, 1.0);
                     Tensor f = randn({2, 3, 5}, rng, 0.2, 1.0);
                     return finite_diff_check([=] { return spectral_convergence(r, f); }, {r, f});
                   }});
  cases.push_back({"log_magnitude_distance", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor r = randn({2, 3, 5}, rng, 0.2, 1.0);
                     Tensor f = randn({2, 3, 5}, rng, 0.2, 1.0);
                     return finite_diff_check([=] { return log_magnitude_distance(r, f); },
                                              {r, f});
                   }});
  cases.push_back({"multi_res_stft_loss", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor r = randn({1, 1, 200}, rng, 0.3);
                     Tensor f = randn({1, 1, 200}, rng, 0.3);
                     r.set_requires_grad(false);
                     const std::vector<StftResolution> res{{64, 40, 16}, {128, 80, 20}};
                     return finite_diff_check([=] { return multi_res_stft_loss(r, f, res); },
                                              {f});
                   }});
  cases.push_back({"pqmf_synthesize", [](std::uint64_t seed) {
                     static const PqmfBank bank = design_pqmf();
                     std::mt19937_64 rng(seed);
                     Tensor s = randn({2, 4, 20}, rng);
                     return finite_diff_check(
                         [=] { return project(pqmf_synthesize(bank, s, bank.delay()), seed); },
                         {s});
                   }});
  cases.push_back({"gan_terms", [](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     Tensor r1 = randn({1, 1, 6}, rng), r2 = randn({1, 1, 3}, rng);
                     Tensor f1 = randn({1, 1, 6}, rng), f2 = randn({1, 1, 3}, rng);
                     Tensor a1 = randn({1, 2, 6}, rng), b1 = randn({1, 2, 6}, rng);
                     return finite_diff_check(
                         [=] {
                           const Tensor d = d_loss({r1, r2}, {f1, f2});
                           const Tensor g = g_adv_loss({f1, f2});
                           const Tensor fm = feature_matching_loss({{a1, r1}}, {{b1, f1}});
                           return add(add(d, scale(g, 0.5)), fm);
                         },
                         {r1, r2, f1, f2, a1, b1});
                   }});
  return cases;
}

// Tiny MB generator -> PQMF synthesis -> combined sub-band and full-band loss
// against a fixed target, checked over every generator parameter. Bias
// perturbations move every time step at once, so a wide step crosses
// leaky-ReLU and |.| kinks; the default step keeps those crossings rare.
inline mbmelgan::GradCheckResult tiny_generator_case(std::uint64_t seed, double epsilon = 1e-7) {
  using namespace mbmelgan;
  static const PqmfBank bank = design_pqmf();
  const GeneratorSpec spec = GeneratorSpec::tiny();
  Generator gen(spec, seed);
  std::mt19937_64 rng(seed + 100);
  const std::size_t frames = 3;
  Tensor mel = randn({spec.n_mels, frames}, rng);
  mel.set_requires_grad(false);
  const std::size_t len = frames * kSamplesPerFrame;
  auto target = signals::speech_like(len, seed);
  Tensor real_full({1, 1, len}, target);
  const SubBands subs = analyze(bank, target);
  std::vector<double> flat;
  for (const auto& b : subs) flat.insert(flat.end(), b.begin(), b.end());
  Tensor real_subs({1, 4, len / 4}, flat);
  LossConfig config = LossConfig::for_variant(Variant::MB);
  return finite_diff_check(
      [&] {
        const Tensor bands = gen.forward(mel).reshape({1, 4, len / 4});
        const Tensor full = pqmf_synthesize(bank, bands, bank.delay());
        return combined_mb_stft_loss(real_full, full, real_subs, bands, config, 4);
      },
      gen.parameters(), epsilon);
}

}  // namespace gradcases
