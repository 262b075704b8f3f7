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

// Generator and multi-scale discriminator graphs with complexity accounting.
//
// All convolutions are weight-normalized: each layer stores a direction v and
// a per-output-channel magnitude g, and the effective kernel is recomputed
// from them on every forward pass.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mbmelgan/ops.hpp"
#include "mbmelgan/tensor.hpp"

namespace mbmelgan {

enum class Variant { MB, FB, BASIC };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

// How the input of a residual block joins its output. Shortcut passes the
// input through a learned 1x1 convolution; Identity adds it unchanged.
enum class ResidualMode { Shortcut, Identity };

std::string residual_name(ResidualMode mode);
ResidualMode parse_residual(const std::string& name);

inline constexpr std::size_t kSamplesPerFrame = 200;

struct GeneratorSpec {
  Variant variant = Variant::MB;
  std::size_t n_mels = 80;
  std::size_t entry_channels = 384;
  std::vector<std::size_t> upsample_factors{2, 5, 5};
  std::vector<std::size_t> stage_channels{192, 96, 48};
  std::vector<std::size_t> resstack_dilations{1, 3, 9, 27};
  std::size_t kernel = 3;
  std::size_t out_channels = 4;
  std::size_t entry_kernel = 7;
  std::size_t exit_kernel = 7;
  double slope = 0.2;
  ResidualMode residual = ResidualMode::Shortcut;

  static GeneratorSpec mb();
  static GeneratorSpec fb();
  static GeneratorSpec basic();
  // Reduced channel widths for laptop-scale training.
  static GeneratorSpec desk(Variant variant = Variant::MB);
  // Minimal MB topology used for gradient checks.
  static GeneratorSpec tiny();
  static GeneratorSpec preset(const std::string& name);

  // Output samples per mel frame after any sub-band synthesis.
  std::size_t samples_per_frame() const;
  // Waveform samples per mel frame emitted by each output channel.
  std::size_t channel_samples_per_frame() const;
  void validate() const;
  bool operator==(const GeneratorSpec&) const = default;
};

struct DiscLayerSpec {
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t groups = 1;
  bool operator==(const DiscLayerSpec&) const = default;
};

struct DiscriminatorSpec {
  std::size_t num_scales = 3;
  // Layers of one block; all but the last are followed by leaky_relu.
  std::vector<DiscLayerSpec> layers;
  double slope = 0.2;
  // Average pooling applied between consecutive scales.
  std::size_t pool_kernel = 4;
  std::size_t pool_stride = 2;
  std::size_t pool_padding = 1;

  static DiscriminatorSpec full();
  static DiscriminatorSpec desk();
  static DiscriminatorSpec tiny();
  static DiscriminatorSpec preset(const std::string& name);

  std::size_t strided_layer_count() const;
  std::size_t total_stride() const;
  // Shortest audio the first scale accepts such that every scale sees at
  // least total_stride() samples.
  std::size_t min_audio_length() const;
  void validate() const;
  bool operator==(const DiscriminatorSpec&) const = default;
};

// A weight-normalized convolution (plain or transposed) with bias.
struct WnConv {
  std::string name;
  Tensor g;     // [C_out]
  Tensor v;     // [C_out x C_in/groups x K]
  Tensor bias;  // [C_out]
  std::size_t c_in = 1;
  std::size_t c_out = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t groups = 1;
  bool transposed = false;
  PadMode pad_mode = PadMode::Zero;

  Tensor weight() const;
  Tensor operator()(const Tensor& x) const;
  std::size_t out_length(std::size_t t_in) const;
  std::size_t macs(std::size_t t_in) const;
  std::size_t parameter_count() const;
};

using NamedTensor = std::pair<std::string, Tensor>;

// Initial weights: v ~ N(0, sigma^2), g = ||v|| per output channel, bias 0.
// With fan_in_scaled, sigma = gain / sqrt(C_in/groups * K); otherwise sigma =
// stddev for every layer.
struct InitOptions {
  bool fan_in_scaled = true;
  double gain = 1.0;
  double stddev = 0.02;
};

class Generator {
 public:
  struct ResBlock {
    WnConv dilated;
    WnConv pointwise;
    std::optional<WnConv> shortcut;
  };
  struct Stage {
    WnConv upsample;
    std::vector<ResBlock> blocks;
  };

  Generator() = default;
  Generator(GeneratorSpec spec, std::uint64_t seed, InitOptions init = {});

  const GeneratorSpec& spec() const { return spec_; }

  // mel [n_mels x T] or [B x n_mels x T] (channel-first) ->
  // [out_channels x L] or [B x out_channels x L], L = channel_samples_per_frame * T.
  // Throws NumericError naming the layer if an activation becomes non-finite.
  Tensor forward(const Tensor& mel) const;

  std::vector<NamedTensor> named_parameters() const;
  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;
  void set_requires_grad(bool value);

  const WnConv& entry() const { return entry_; }
  const std::vector<Stage>& stages() const { return stages_; }
  const WnConv& exit() const { return exit_; }

 private:
  GeneratorSpec spec_;
  WnConv entry_;
  std::vector<Stage> stages_;
  WnConv exit_;
};

class MultiScaleDiscriminator {
 public:
  struct ScaleOutput {
    // Post-activation output of every layer; the last entry is the raw score.
    std::vector<Tensor> features;
    const Tensor& score() const { return features.back(); }
  };

  MultiScaleDiscriminator() = default;
  MultiScaleDiscriminator(DiscriminatorSpec spec, std::uint64_t seed, InitOptions init = {});

  const DiscriminatorSpec& spec() const { return spec_; }

  // audio [1 x T] or [B x 1 x T]; scale k sees the input average-pooled k times.
  std::vector<ScaleOutput> forward(const Tensor& audio) const;

  std::vector<NamedTensor> named_parameters() const;
  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;
  void set_requires_grad(bool value);

 private:
  DiscriminatorSpec spec_;
  std::vector<std::vector<WnConv>> blocks_;
};

// Channel-first generator input for one utterance: [n_mels x T].
Tensor mel_input(const std::vector<double>& frames_by_bins, std::size_t frames,
                 std::size_t n_mels);

// Span of a stack of kernel-k convolutions with the given dilations.
std::size_t receptive_field(const std::vector<std::size_t>& dilations, std::size_t kernel);
// Receptive field of one ResStack of the generator.
std::size_t receptive_field(const GeneratorSpec& spec);

// Mel frames on each side of a frame that can influence its output samples.
std::size_t context_frames(const GeneratorSpec& spec);

std::size_t count_params(const GeneratorSpec& spec);
std::size_t count_params(const DiscriminatorSpec& spec);
std::size_t count_params(const Generator& gen);
std::size_t count_params(const MultiScaleDiscriminator& disc);

// 2 x multiply-accumulates of every convolution for the given number of mel
// frames (80 frames = one second of audio).
double count_flops(const GeneratorSpec& spec, std::size_t frames = 80);

struct ModelStats {
  std::size_t parameter_count = 0;
  double flops_per_second_of_audio = 0.0;
  std::size_t receptive_field_samples = 0;
  std::size_t context_frames = 0;
};

ModelStats model_stats(const GeneratorSpec& spec);

}  // namespace mbmelgan
