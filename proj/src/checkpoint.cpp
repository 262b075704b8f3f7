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

#include "mbmelgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "mbmelgan/error.hpp"

namespace mbmelgan {

namespace {

constexpr std::uint8_t kMagic[4] = {'M', 'B', 'M', 'G'};
constexpr std::size_t kMaxRank = 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t to_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw FormatError(std::string("checkpoint: ") + what + " too large");
  return static_cast<std::uint32_t>(v);
}

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::size_t end, std::string source)
      : bytes_(bytes), end_(end), source_(std::move(source)) {}

  std::size_t remaining() const { return end_ - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(source_ + ": truncated checkpoint while reading " + what);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
  std::string source_;
};

}  // namespace

const StoredTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const StoredTensor& Checkpoint::tensor(const std::string& name) const {
  const StoredTensor* t = find(name);
  if (!t) throw FormatError(metadata.source() + ": missing tensor '" + name + "'");
  return *t;
}

void Checkpoint::add(std::string name, Shape shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("checkpoint: tensor '" + name + "' has " + std::to_string(values.size()) +
                     " values for shape " + shape_str(shape));
  }
  if (find(name)) throw FormatError("checkpoint: duplicate tensor '" + name + "'");
  tensors.push_back({std::move(name), std::move(shape), std::move(values)});
}

void Checkpoint::add(std::string name, const Tensor& t) {
  add(std::move(name), t.shape(), std::vector<double>(t.data().begin(), t.data().end()));
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt, TensorDtype dtype) {
  Settings meta = ckpt.metadata;
  meta.set("tensor_dtype", dtype == TensorDtype::F32 ? "f32" : "f64");
  const std::string text = meta.serialize();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, to_u32(text.size(), "metadata"));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& t : ckpt.tensors) {
    put_u32(out, to_u32(t.name.size(), "tensor name"));
    out.insert(out.end(), t.name.begin(), t.name.end());
    if (t.shape.size() > kMaxRank) throw FormatError("checkpoint: rank too large for " + t.name);
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put_u32(out, to_u32(d, "dimension"));
    for (double v : t.values) {
      if (dtype == TensorDtype::F32) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      } else {
        put_u64(out, std::bit_cast<std::uint64_t>(v));
      }
    }
  }
  put_u64(out, fnv1a64(out));
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < 4 + 4 + 4 + 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(source + ": not a checkpoint (bad magic or too short)");
  }
  const std::size_t body = bytes.size() - 8;
  ByteReader digest(bytes.subspan(body), 8, source);
  const std::uint64_t stored = digest.u64("digest");
  if (stored != fnv1a64(bytes.first(body))) {
    throw FormatError(source + ": checkpoint digest mismatch (file corrupted or truncated)");
  }
  ByteReader r(bytes, body, source);
  r.text(4, "magic");
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError(source + ": unsupported checkpoint version " + std::to_string(version) +
                      " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t meta_len = r.u32("metadata length");
  Checkpoint ckpt;
  ckpt.metadata = Settings::parse(r.text(meta_len, "metadata"), source);
  const std::string dtype = ckpt.metadata.get_or("tensor_dtype", "f32");
  if (dtype != "f32" && dtype != "f64") {
    throw FormatError(source + ": unknown tensor_dtype '" + dtype + "'");
  }
  const std::size_t width = dtype == "f32" ? 4 : 8;
  while (r.remaining() > 0) {
    StoredTensor t;
    t.name = r.text(r.u32("tensor name length"), "tensor name");
    const std::uint32_t rank = r.u32("tensor rank");
    if (rank > kMaxRank) {
      throw FormatError(source + ": tensor '" + t.name + "' has implausible rank " +
                        std::to_string(rank));
    }
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      t.shape.push_back(r.u32("tensor dimension"));
      count *= t.shape.back();
    }
    if (count > r.remaining() / width) {
      throw FormatError(source + ": tensor '" + t.name + "' declares " + shape_str(t.shape) +
                        " but only " + std::to_string(r.remaining()) + " bytes remain");
    }
    t.values.resize(count);
    for (auto& v : t.values) {
      v = width == 4 ? static_cast<double>(std::bit_cast<float>(r.u32("tensor data")))
                     : std::bit_cast<double>(r.u64("tensor data"));
    }
    if (ckpt.find(t.name)) throw FormatError(source + ": duplicate tensor '" + t.name + "'");
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt, TensorDtype dtype) {
  const auto bytes = encode_checkpoint(ckpt, dtype);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + tmp + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes, path);
}

void store_parameters(Checkpoint& ckpt, const std::vector<NamedTensor>& params) {
  for (const auto& [name, t] : params) ckpt.add(name, t);
}

void load_parameters(const Checkpoint& ckpt, const std::vector<NamedTensor>& params) {
  // Validate everything first so a failure leaves the model untouched.
  for (const auto& [name, t] : params) {
    const StoredTensor& s = ckpt.tensor(name);
    if (s.shape != t.shape()) {
      throw FormatError(ckpt.metadata.source() + ": tensor '" + name + "' has shape " +
                        shape_str(s.shape) + ", model expects " + shape_str(t.shape()));
    }
  }
  for (const auto& [name, t] : params) {
    const StoredTensor& s = ckpt.tensor(name);
    Tensor dst = t;
    std::copy(s.values.begin(), s.values.end(), dst.data_mut().begin());
  }
}

Checkpoint make_model_checkpoint(const Generator& gen, const MelConfig& features,
                                 const FeatureStats* stats, const PqmfBank* pqmf,
                                 std::size_t step) {
  Checkpoint c;
  c.metadata.set("kind", "model");
  c.metadata.set("train.step", std::to_string(step));
  store_generator_spec(c.metadata, gen.spec());
  store_mel_config(c.metadata, features);
  if (pqmf) store_pqmf(c.metadata, *pqmf);
  if (stats) {
    c.add("stats.mean", {stats->mean.size()}, stats->mean);
    c.add("stats.stddev", {stats->stddev.size()}, stats->stddev);
  }
  store_parameters(c, gen.named_parameters());
  return c;
}

ModelBundle load_model(const Checkpoint& ckpt) {
  const Settings& m = ckpt.metadata;
  const std::string kind = m.get_or("kind", "");
  if (kind != "model" && kind != "train") {
    throw FormatError(m.source() + ": expected a model or training checkpoint, found kind '" +
                      kind + "'");
  }
  ModelBundle b;
  b.kind = kind;
  b.spec = load_generator_spec(m);
  b.features = load_mel_config(m, b.spec.n_mels);
  b.step = m.has("train.step") ? get_size(m, "train.step") : 0;
  if (has_pqmf(m)) b.pqmf = load_pqmf(m);
  if (b.spec.variant == Variant::MB && !b.pqmf) {
    throw FormatError(m.source() + ": multi-band checkpoint without PQMF coefficients");
  }
  if (const StoredTensor* mean = ckpt.find("stats.mean")) {
    const StoredTensor& sd = ckpt.tensor("stats.stddev");
    if (mean->values.size() != b.spec.n_mels || sd.values.size() != b.spec.n_mels) {
      throw FormatError(m.source() + ": feature statistics do not match n_mels");
    }
    b.stats = FeatureStats{mean->values, sd.values};
  }
  b.generator = Generator(b.spec, 0);
  load_parameters(ckpt, b.generator.named_parameters());
  b.generator.set_requires_grad(false);
  return b;
}

void write_mel_file(const std::string& path, const MelSpectrogram& mel, const MelConfig& config) {
  if (mel.frames == 0) throw ShapeError("mel file: no frames to write");
  Checkpoint c;
  c.metadata.set("kind", "mel");
  store_mel_config(c.metadata, config);
  c.add("mel", {mel.frames, mel.n_mels}, mel.values);
  write_checkpoint(path, c, TensorDtype::F32);
}

MelFile read_mel_file(const std::string& path) {
  const Checkpoint c = read_checkpoint(path);
  if (c.metadata.get_or("kind", "") != "mel") {
    throw FormatError(path + ": not a mel feature file");
  }
  const StoredTensor& t = c.tensor("mel");
  if (t.shape.size() != 2 || t.shape[0] == 0) {
    throw FormatError(path + ": mel tensor must be non-empty [frames x n_mels], got " +
                      shape_str(t.shape));
  }
  MelFile f;
  f.config = load_mel_config(c.metadata, t.shape[1]);
  f.mel.frames = t.shape[0];
  f.mel.n_mels = t.shape[1];
  f.mel.hop_samples = f.config.hop_size;
  f.mel.frame_samples = f.config.window_size;
  f.mel.values = t.values;
  return f;
}

}  // namespace mbmelgan
