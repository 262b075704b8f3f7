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

// Binary container for model weights, training state and mel features.
//
// Layout (little-endian):
//   "MBMG" | u32 version | u32 metadata length | metadata (key=value lines)
//   repeated until the last 8 bytes:
//     u32 name length | name | u32 rank | u32 dims[rank] | raw values
//   u64 FNV-1a digest of every preceding byte
//
// Values are 32-bit floats unless the metadata says tensor_dtype=f64, which
// training checkpoints use so that resuming is bit-exact.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbmelgan/config.hpp"
#include "mbmelgan/dsp.hpp"
#include "mbmelgan/models.hpp"
#include "mbmelgan/pqmf.hpp"
#include "mbmelgan/tensor.hpp"

namespace mbmelgan {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class TensorDtype { F32, F64 };

struct StoredTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  Settings metadata;
  std::vector<StoredTensor> tensors;

  const StoredTensor* find(const std::string& name) const;
  // Throws FormatError when absent.
  const StoredTensor& tensor(const std::string& name) const;
  void add(std::string name, Shape shape, std::vector<double> values);
  void add(std::string name, const Tensor& t);
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt, TensorDtype dtype);
// Verifies the digest before parsing anything else.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes,
                             const std::string& source = "<memory>");

// Writes through a temporary file and renames it into place.
void write_checkpoint(const std::string& path, const Checkpoint& ckpt, TensorDtype dtype);
Checkpoint read_checkpoint(const std::string& path);

void store_parameters(Checkpoint& ckpt, const std::vector<NamedTensor>& params);
// Copies stored values into the given tensors; names and shapes must match.
void load_parameters(const Checkpoint& ckpt, const std::vector<NamedTensor>& params);

// Everything inference needs from a training or model checkpoint.
struct ModelBundle {
  GeneratorSpec spec;
  MelConfig features;
  std::optional<FeatureStats> stats;
  std::optional<PqmfBank> pqmf;  // present for MB
  Generator generator;
  std::string kind;
  std::size_t step = 0;
};

Checkpoint make_model_checkpoint(const Generator& gen, const MelConfig& features,
                                 const FeatureStats* stats, const PqmfBank* pqmf,
                                 std::size_t step = 0);
ModelBundle load_model(const Checkpoint& ckpt);

// Log-mel feature files: kind=mel, tensor "mel" [frames x n_mels].
void write_mel_file(const std::string& path, const MelSpectrogram& mel, const MelConfig& config);
struct MelFile {
  MelSpectrogram mel;
  MelConfig config;
};
MelFile read_mel_file(const std::string& path);

}  // namespace mbmelgan
