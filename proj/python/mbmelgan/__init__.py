# Copyright 2026 The mbmelgan Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Multi-band MelGAN vocoder: features, PQMF filter bank and synthesis."""

from ._core import (
    ConfigError,
    Error,
    FormatError,
    NumericError,
    PqmfBank,
    ShapeError,
    Vocoder,
    design_pqmf,
    mel_spectrogram,
    model_stats,
    read_wav,
    receptive_field,
    stft_magnitude,
    write_random_model,
    write_wav,
)

__all__ = [
    "ConfigError",
    "Error",
    "FormatError",
    "NumericError",
    "PqmfBank",
    "ShapeError",
    "Vocoder",
    "design_pqmf",
    "mel_spectrogram",
    "model_stats",
    "read_wav",
    "receptive_field",
    "stft_magnitude",
    "write_random_model",
    "write_wav",
]
