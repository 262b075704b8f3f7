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

#include "mbmelgan/models.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "mbmelgan/error.hpp"

namespace mbmelgan {

namespace {

std::string num(std::size_t v) { return std::to_string(v); }

std::size_t product(const std::vector<std::size_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::size_t{1}, std::multiplies<>());
}

class Initializer {
 public:
  Initializer(std::uint64_t seed, InitOptions opts) : rng_(seed), opts_(opts) {}

  WnConv make(std::string name, std::size_t c_in, std::size_t c_out, std::size_t kernel) {
    WnConv c;
    c.name = std::move(name);
    c.c_in = c_in;
    c.c_out = c_out;
    c.kernel = kernel;
    return c;
  }

  // Allocates and draws the tensors once the geometry is final.
  void fill(WnConv& c) {
    const std::size_t fan = c.transposed ? c.c_in : c.c_in / c.groups;
    const std::size_t per_out = fan * c.kernel;
    const double sigma = opts_.fan_in_scaled
                             ? opts_.gain / std::sqrt(static_cast<double>(per_out))
                             : opts_.stddev;
    std::normal_distribution<double> dist(0.0, sigma);
    std::vector<double> v(c.c_out * per_out);
    for (auto& x : v) x = dist(rng_);
    std::vector<double> g(c.c_out);
    for (std::size_t o = 0; o < c.c_out; ++o) {
      double ss = 0.0;
      for (std::size_t i = 0; i < per_out; ++i) ss += v[o * per_out + i] * v[o * per_out + i];
      g[o] = std::sqrt(ss);
    }
    c.v = Tensor({c.c_out, fan, c.kernel}, std::move(v), true);
    c.g = Tensor({c.c_out}, std::move(g), true);
    c.bias = Tensor({c.c_out}, 0.0, true);
  }

 private:
  std::mt19937_64 rng_;
  InitOptions opts_;
};

void check_finite(const Tensor& t, std::size_t layer, const std::string& name) {
  for (double x : t.data()) {
    if (!std::isfinite(x)) {
      throw NumericError("generator: non-finite activation after layer " + num(layer) + " (" +
                         name + ")");
    }
  }
}

void append(std::vector<NamedTensor>& out, const WnConv& c) {
  out.emplace_back(c.name + ".g", c.g);
  out.emplace_back(c.name + ".v", c.v);
  out.emplace_back(c.name + ".bias", c.bias);
}

std::size_t conv_params(std::size_t c_in_per_group, std::size_t c_out, std::size_t kernel) {
  return c_out * c_in_per_group * kernel + 2 * c_out;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::MB: return "mb";
    case Variant::FB: return "fb";
    case Variant::BASIC: return "basic";
  }
  return "mb";
}

Variant parse_variant(const std::string& name) {
  if (name == "mb") return Variant::MB;
  if (name == "fb") return Variant::FB;
  if (name == "basic") return Variant::BASIC;
  throw ConfigError("unknown model variant '" + name + "' (expected mb, fb or basic)");
}

std::string residual_name(ResidualMode mode) {
  return mode == ResidualMode::Shortcut ? "shortcut" : "identity";
}

ResidualMode parse_residual(const std::string& name) {
  if (name == "shortcut") return ResidualMode::Shortcut;
  if (name == "identity") return ResidualMode::Identity;
  throw ConfigError("unknown residual mode '" + name + "' (expected shortcut or identity)");
}

GeneratorSpec GeneratorSpec::mb() { return GeneratorSpec{}; }

GeneratorSpec GeneratorSpec::fb() {
  GeneratorSpec s;
  s.variant = Variant::FB;
  s.entry_channels = 512;
  s.upsample_factors = {8, 5, 5};
  s.stage_channels = {256, 128, 64};
  s.out_channels = 1;
  return s;
}

GeneratorSpec GeneratorSpec::basic() {
  GeneratorSpec s = fb();
  s.variant = Variant::BASIC;
  s.resstack_dilations = {1, 3, 9};
  return s;
}

GeneratorSpec GeneratorSpec::desk(Variant variant) {
  GeneratorSpec s = variant == Variant::MB ? mb() : variant == Variant::FB ? fb() : basic();
  if (variant == Variant::MB) {
    s.entry_channels = 48;
    s.stage_channels = {24, 12, 6};
  } else {
    s.entry_channels = 64;
    s.stage_channels = {32, 16, 8};
  }
  return s;
}

GeneratorSpec GeneratorSpec::tiny() {
  GeneratorSpec s = mb();
  s.n_mels = 2;
  s.entry_channels = 16;
  s.stage_channels = {8, 4, 2};
  return s;
}

GeneratorSpec GeneratorSpec::preset(const std::string& name) {
  if (name == "mb") return mb();
  if (name == "fb") return fb();
  if (name == "basic") return basic();
  if (name == "desk" || name == "desk-mb") return desk(Variant::MB);
  if (name == "desk-fb") return desk(Variant::FB);
  if (name == "desk-basic") return desk(Variant::BASIC);
  if (name == "tiny") return tiny();
  throw ConfigError("unknown generator preset '" + name +
                    "' (expected mb, fb, basic, desk, desk-mb, desk-fb, desk-basic or tiny)");
}

std::size_t GeneratorSpec::channel_samples_per_frame() const { return product(upsample_factors); }

std::size_t GeneratorSpec::samples_per_frame() const {
  return channel_samples_per_frame() * (variant == Variant::MB ? out_channels : 1);
}

void GeneratorSpec::validate() const {
  if (n_mels == 0 || entry_channels == 0 || out_channels == 0) {
    throw ConfigError("generator: n_mels, entry_channels and out_channels must be positive");
  }
  if (upsample_factors.empty() || upsample_factors.size() != stage_channels.size()) {
    throw ConfigError("generator: need one stage channel count per upsample factor (" +
                      num(upsample_factors.size()) + " factors, " +
                      num(stage_channels.size()) + " channel counts)");
  }
  for (std::size_t i = 0; i < upsample_factors.size(); ++i) {
    if (upsample_factors[i] == 0 || stage_channels[i] == 0) {
      throw ConfigError("generator: stage " + num(i) + " has a zero factor or width");
    }
  }
  if (resstack_dilations.empty()) throw ConfigError("generator: empty ResStack dilations");
  for (auto d : resstack_dilations) {
    if (d == 0) throw ConfigError("generator: dilation must be >= 1");
  }
  if (kernel % 2 == 0 || entry_kernel % 2 == 0 || exit_kernel % 2 == 0) {
    throw ConfigError("generator: kernel sizes must be odd");
  }
  if (!(slope > 0.0 && slope < 1.0)) throw ConfigError("generator: slope must be in (0, 1)");
  if (variant != Variant::MB && out_channels != 1) {
    throw ConfigError("generator: full-band variants emit exactly one channel, got " +
                      num(out_channels));
  }
  if (samples_per_frame() != kSamplesPerFrame) {
    throw ConfigError("generator: upsample product " + num(channel_samples_per_frame()) +
                      (variant == Variant::MB ? " x " + num(out_channels) + " bands" : "") +
                      " gives " + num(samples_per_frame()) + " samples per frame, hop is " +
                      num(kSamplesPerFrame));
  }
}

DiscriminatorSpec DiscriminatorSpec::full() {
  DiscriminatorSpec s;
  s.layers = {{16, 15, 1, 1}, {64, 41, 4, 4}, {256, 41, 4, 16},
              {512, 41, 4, 64}, {512, 5, 1, 1}, {1, 3, 1, 1}};
  return s;
}

DiscriminatorSpec DiscriminatorSpec::desk() {
  DiscriminatorSpec s;
  s.layers = {{8, 15, 1, 1}, {16, 41, 4, 2}, {32, 41, 4, 4},
              {64, 41, 4, 8}, {64, 5, 1, 1}, {1, 3, 1, 1}};
  return s;
}

DiscriminatorSpec DiscriminatorSpec::tiny() {
  DiscriminatorSpec s;
  s.layers = {{4, 15, 1, 1}, {8, 41, 4, 2}, {8, 41, 4, 4},
              {8, 41, 4, 4}, {8, 5, 1, 1}, {1, 3, 1, 1}};
  return s;
}

DiscriminatorSpec DiscriminatorSpec::preset(const std::string& name) {
  if (name == "full") return full();
  if (name == "desk") return desk();
  if (name == "tiny") return tiny();
  throw ConfigError("unknown discriminator preset '" + name + "' (expected full, desk or tiny)");
}

std::size_t DiscriminatorSpec::strided_layer_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.stride > 1 ? 1 : 0;
  return n;
}

std::size_t DiscriminatorSpec::total_stride() const {
  std::size_t s = 1;
  for (const auto& l : layers) s *= l.stride;
  return s;
}

std::size_t DiscriminatorSpec::min_audio_length() const {
  // Smallest T whose pooled lengths all stay >= total_stride().
  const auto pooled = [&](std::size_t t) {
    return (t + 2 * pool_padding - pool_kernel) / pool_stride + 1;
  };
  std::size_t t = total_stride();
  for (std::size_t k = 1; k < num_scales; ++k) {
    std::size_t prev = std::max(t, pool_kernel);
    while (pooled(prev) < t) ++prev;
    t = prev;
  }
  return t;
}

void DiscriminatorSpec::validate() const {
  if (num_scales == 0) throw ConfigError("discriminator: num_scales must be >= 1");
  if (layers.size() < 2) throw ConfigError("discriminator: a block needs at least two layers");
  std::size_t c_in = 1;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.kernel % 2 == 0 || l.stride == 0 || l.groups == 0 || l.out_channels == 0) {
      throw ConfigError("discriminator: layer " + num(i) +
                        " needs an odd kernel and positive stride, groups and width");
    }
    if (c_in % l.groups != 0 || l.out_channels % l.groups != 0) {
      throw ConfigError("discriminator: layer " + num(i) + " groups=" + num(l.groups) +
                        " must divide input " + num(c_in) + " and output " +
                        num(l.out_channels) + " channels");
    }
    c_in = l.out_channels;
  }
  if (layers.back().out_channels != 1) {
    throw ConfigError("discriminator: the score layer must have one output channel");
  }
  if (pool_kernel < pool_stride || pool_stride == 0) {
    throw ConfigError("discriminator: pooling kernel must be >= stride >= 1");
  }
  if (!(slope > 0.0 && slope < 1.0)) throw ConfigError("discriminator: slope must be in (0, 1)");
}

Tensor WnConv::weight() const { return weight_norm(g, v); }

Tensor WnConv::operator()(const Tensor& x) const {
  if (transposed) return conv_transpose1d(x, weight(), bias, stride);
  Conv1dOptions o;
  o.stride = stride;
  o.dilation = dilation;
  o.groups = groups;
  o.padding = static_cast<long>(dilation * (kernel - 1) / 2);
  o.pad_mode = pad_mode;
  return conv1d(x, weight(), bias, o);
}

std::size_t WnConv::out_length(std::size_t t_in) const {
  if (transposed) return stride * t_in;
  const std::size_t pad = dilation * (kernel - 1) / 2;
  return (t_in + 2 * pad - dilation * (kernel - 1) - 1) / stride + 1;
}

std::size_t WnConv::macs(std::size_t t_in) const {
  if (transposed) return c_in * c_out * kernel * t_in;
  return c_out * (c_in / groups) * kernel * out_length(t_in);
}

std::size_t WnConv::parameter_count() const {
  return conv_params(transposed ? c_in : c_in / groups, c_out, kernel);
}

Generator::Generator(GeneratorSpec spec, std::uint64_t seed, InitOptions init)
    : spec_(std::move(spec)) {
  spec_.validate();
  Initializer ini(seed, init);
  entry_ = ini.make("gen.entry", spec_.n_mels, spec_.entry_channels, spec_.entry_kernel);
  entry_.pad_mode = PadMode::Reflect;
  ini.fill(entry_);
  std::size_t c = spec_.entry_channels;
  for (std::size_t s = 0; s < spec_.upsample_factors.size(); ++s) {
    const std::string prefix = "gen.stage" + num(s);
    const std::size_t f = spec_.upsample_factors[s];
    const std::size_t w = spec_.stage_channels[s];
    Stage st;
    st.upsample = ini.make(prefix + ".upsample", c, w, 2 * f);
    st.upsample.transposed = true;
    st.upsample.stride = f;
    ini.fill(st.upsample);
    for (std::size_t b = 0; b < spec_.resstack_dilations.size(); ++b) {
      const std::string bp = prefix + ".block" + num(b);
      ResBlock rb;
      rb.dilated = ini.make(bp + ".dilated", w, w, spec_.kernel);
      rb.dilated.dilation = spec_.resstack_dilations[b];
      rb.dilated.pad_mode = PadMode::Reflect;
      ini.fill(rb.dilated);
      rb.pointwise = ini.make(bp + ".pointwise", w, w, 1);
      ini.fill(rb.pointwise);
      if (spec_.residual == ResidualMode::Shortcut) {
        rb.shortcut = ini.make(bp + ".shortcut", w, w, 1);
        ini.fill(*rb.shortcut);
      }
      st.blocks.push_back(std::move(rb));
    }
    stages_.push_back(std::move(st));
    c = w;
  }
  exit_ = ini.make("gen.exit", c, spec_.out_channels, spec_.exit_kernel);
  exit_.pad_mode = PadMode::Reflect;
  ini.fill(exit_);
}

Tensor Generator::forward(const Tensor& mel) const {
  const std::size_t channel_axis = mel.rank() == 3 ? 1 : 0;
  if ((mel.rank() != 2 && mel.rank() != 3) || mel.size(channel_axis) != spec_.n_mels) {
    throw ShapeError("generator: expected mel [n_mels=" + num(spec_.n_mels) +
                     " x T] or [B x n_mels x T], got " + shape_str(mel.shape()));
  }
  const double a = spec_.slope;
  std::size_t layer = 0;
  Tensor x = leaky_relu(entry_(mel), a);
  check_finite(x, layer++, entry_.name);
  for (const auto& st : stages_) {
    x = st.upsample(x);
    check_finite(x, layer++, st.upsample.name);
    for (const auto& rb : st.blocks) {
      Tensor y = rb.pointwise(leaky_relu(rb.dilated(leaky_relu(x, a)), a));
      x = add(rb.shortcut ? (*rb.shortcut)(x) : x, y);
      check_finite(x, layer++, rb.dilated.name.substr(0, rb.dilated.name.rfind('.')));
    }
    x = leaky_relu(x, a);
  }
  x = tanh_act(exit_(x));
  check_finite(x, layer, exit_.name);
  return x;
}

std::vector<NamedTensor> Generator::named_parameters() const {
  std::vector<NamedTensor> out;
  append(out, entry_);
  for (const auto& st : stages_) {
    append(out, st.upsample);
    for (const auto& rb : st.blocks) {
      append(out, rb.dilated);
      append(out, rb.pointwise);
      if (rb.shortcut) append(out, *rb.shortcut);
    }
  }
  append(out, exit_);
  return out;
}

std::vector<Tensor> Generator::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

std::size_t Generator::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : parameters()) n += t.numel();
  return n;
}

void Generator::set_requires_grad(bool value) {
  for (auto t : parameters()) t.set_requires_grad(value);
}

MultiScaleDiscriminator::MultiScaleDiscriminator(DiscriminatorSpec spec, std::uint64_t seed,
                                                 InitOptions init)
    : spec_(std::move(spec)) {
  spec_.validate();
  Initializer ini(seed, init);
  for (std::size_t k = 0; k < spec_.num_scales; ++k) {
    std::vector<WnConv> block;
    std::size_t c_in = 1;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
      const auto& l = spec_.layers[i];
      WnConv c = ini.make("disc.scale" + num(k) + ".layer" + num(i), c_in, l.out_channels,
                          l.kernel);
      c.stride = l.stride;
      c.groups = l.groups;
      ini.fill(c);
      block.push_back(std::move(c));
      c_in = l.out_channels;
    }
    blocks_.push_back(std::move(block));
  }
}

std::vector<MultiScaleDiscriminator::ScaleOutput> MultiScaleDiscriminator::forward(
    const Tensor& audio) const {
  const std::size_t channel_axis = audio.rank() == 3 ? 1 : 0;
  if ((audio.rank() != 2 && audio.rank() != 3) || audio.size(channel_axis) != 1) {
    throw ShapeError("discriminator: expected audio [1 x T] or [B x 1 x T], got " +
                     shape_str(audio.shape()));
  }
  const std::size_t t = audio.size(audio.rank() - 1);
  if (t < spec_.min_audio_length()) {
    throw ShapeError("discriminator: audio length " + num(t) + " is shorter than the minimum " +
                     num(spec_.min_audio_length()) + " for " + num(spec_.num_scales) +
                     " scales with total stride " + num(spec_.total_stride()));
  }
  std::vector<ScaleOutput> out;
  Tensor x = audio;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (k > 0) x = avg_pool1d(x, spec_.pool_kernel, spec_.pool_stride, spec_.pool_padding);
    ScaleOutput so;
    Tensor h = x;
    for (std::size_t i = 0; i < blocks_[k].size(); ++i) {
      h = blocks_[k][i](h);
      if (i + 1 < blocks_[k].size()) h = leaky_relu(h, spec_.slope);
      so.features.push_back(h);
    }
    out.push_back(std::move(so));
  }
  return out;
}

std::vector<NamedTensor> MultiScaleDiscriminator::named_parameters() const {
  std::vector<NamedTensor> out;
  for (const auto& block : blocks_) {
    for (const auto& c : block) append(out, c);
  }
  return out;
}

std::vector<Tensor> MultiScaleDiscriminator::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

std::size_t MultiScaleDiscriminator::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : parameters()) n += t.numel();
  return n;
}

void MultiScaleDiscriminator::set_requires_grad(bool value) {
  for (auto t : parameters()) t.set_requires_grad(value);
}

Tensor mel_input(const std::vector<double>& frames_by_bins, std::size_t frames,
                 std::size_t n_mels) {
  if (frames_by_bins.size() != frames * n_mels) {
    throw ShapeError("mel_input: " + num(frames_by_bins.size()) + " values for " + num(frames) +
                     " frames x " + num(n_mels) + " bins");
  }
  std::vector<double> cf(frames * n_mels);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t m = 0; m < n_mels; ++m) cf[m * frames + t] = frames_by_bins[t * n_mels + m];
  return Tensor({n_mels, frames}, std::move(cf));
}

std::size_t receptive_field(const std::vector<std::size_t>& dilations, std::size_t kernel) {
  std::size_t rf = 1;
  for (auto d : dilations) rf += (kernel - 1) * d;
  return rf;
}

std::size_t receptive_field(const GeneratorSpec& spec) {
  return receptive_field(spec.resstack_dilations, spec.kernel);
}

std::size_t context_frames(const GeneratorSpec& spec) {
  // Half-width of the dependency cone, walked back from the output rate to
  // the frame rate. A transposed conv with K = 2s maps h output samples to
  // at most ceil(h/s) + 1 inputs.
  std::size_t h = (spec.exit_kernel - 1) / 2;
  const std::size_t stack = (receptive_field(spec) - 1) / 2;
  for (std::size_t s = spec.upsample_factors.size(); s-- > 0;) {
    h += stack;
    const std::size_t f = spec.upsample_factors[s];
    h = (h + f - 1) / f + 1;
  }
  return h + (spec.entry_kernel - 1) / 2;
}

std::size_t count_params(const GeneratorSpec& spec) {
  spec.validate();
  std::size_t n = conv_params(spec.n_mels, spec.entry_channels, spec.entry_kernel);
  std::size_t c = spec.entry_channels;
  for (std::size_t s = 0; s < spec.upsample_factors.size(); ++s) {
    const std::size_t w = spec.stage_channels[s];
    n += conv_params(c, w, 2 * spec.upsample_factors[s]);
    const std::size_t block = conv_params(w, w, spec.kernel) + conv_params(w, w, 1) +
                              (spec.residual == ResidualMode::Shortcut ? conv_params(w, w, 1) : 0);
    n += block * spec.resstack_dilations.size();
    c = w;
  }
  return n + conv_params(c, spec.out_channels, spec.exit_kernel);
}

std::size_t count_params(const DiscriminatorSpec& spec) {
  spec.validate();
  std::size_t n = 0;
  std::size_t c_in = 1;
  for (const auto& l : spec.layers) {
    n += conv_params(c_in / l.groups, l.out_channels, l.kernel);
    c_in = l.out_channels;
  }
  return n * spec.num_scales;
}

std::size_t count_params(const Generator& gen) { return gen.parameter_count(); }
std::size_t count_params(const MultiScaleDiscriminator& disc) { return disc.parameter_count(); }

double count_flops(const GeneratorSpec& spec, std::size_t frames) {
  spec.validate();
  const auto macs = [](std::size_t c_in, std::size_t c_out, std::size_t k, std::size_t t) {
    return static_cast<double>(c_in) * static_cast<double>(c_out) * static_cast<double>(k) *
           static_cast<double>(t);
  };
  std::size_t t = frames;
  double total = macs(spec.n_mels, spec.entry_channels, spec.entry_kernel, t);
  std::size_t c = spec.entry_channels;
  for (std::size_t s = 0; s < spec.upsample_factors.size(); ++s) {
    const std::size_t f = spec.upsample_factors[s];
    const std::size_t w = spec.stage_channels[s];
    total += macs(c, w, 2 * f, t);
    t *= f;
    const double block = macs(w, w, spec.kernel, t) + macs(w, w, 1, t) +
                         (spec.residual == ResidualMode::Shortcut ? macs(w, w, 1, t) : 0.0);
    total += block * static_cast<double>(spec.resstack_dilations.size());
    c = w;
  }
  total += macs(c, spec.out_channels, spec.exit_kernel, t);
  return 2.0 * total;
}

ModelStats model_stats(const GeneratorSpec& spec) {
  ModelStats s;
  s.parameter_count = count_params(spec);
  s.flops_per_second_of_audio = count_flops(spec, 16000 / kSamplesPerFrame);
  s.receptive_field_samples = receptive_field(spec);
  s.context_frames = context_frames(spec);
  return s;
}

}  // namespace mbmelgan
