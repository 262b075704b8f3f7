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

#include <stdexcept>
#include <string>

namespace mbmelgan {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shape or dimension mismatch. The message names the offending dimension.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid model, loss, training or filter-bank configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or corrupted file (WAV, checkpoint, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf in activations or losses, or a failed numerical design search.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mbmelgan
