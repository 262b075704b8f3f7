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

// Python bindings: feature extraction, PQMF, complexity accounting,
// checkpoint loading and synthesis.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mbmelgan/checkpoint.hpp"
#include "mbmelgan/dsp.hpp"
#include "mbmelgan/error.hpp"
#include "mbmelgan/inference.hpp"
#include "mbmelgan/models.hpp"
#include "mbmelgan/pqmf.hpp"

namespace py = pybind11;
using namespace mbmelgan;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw ShapeError("expected a 1-D array, got " + std::to_string(a.ndim()) + "-D");
  return {a.data(), a.data() + a.size()};
}

Array matrix(const std::vector<double>& values, std::size_t rows, std::size_t cols) {
  return Array(std::vector<py::ssize_t>{static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)},
               values.data());
}

Array vector_array(const std::vector<double>& values) {
  return Array(std::vector<py::ssize_t>{static_cast<py::ssize_t>(values.size())}, values.data());
}

Array rows_array(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return matrix(flat, rows.size(), cols);
}

MelSpectrogram mel_from_array(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("mel must be [frames x n_mels]");
  MelSpectrogram mel;
  mel.frames = static_cast<std::size_t>(a.shape(0));
  mel.n_mels = static_cast<std::size_t>(a.shape(1));
  mel.values.assign(a.data(), a.data() + a.size());
  return mel;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-band MelGAN vocoder";

  static py::exception<Error> base(m, "Error");
  static py::exception<ShapeError> shape_error(m, "ShapeError", base.ptr());
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<FormatError> format_error(m, "FormatError", base.ptr());
  static py::exception<NumericError> numeric_error(m, "NumericError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ShapeError& e) {
      PyErr_SetString(shape_error.ptr(), e.what());
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), e.what());
    } catch (const FormatError& e) {
      PyErr_SetString(format_error.ptr(), e.what());
    } catch (const NumericError& e) {
      PyErr_SetString(numeric_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(base.ptr(), e.what());
    }
  });

  m.def("receptive_field", py::overload_cast<const std::vector<std::size_t>&, std::size_t>(
                               &receptive_field),
        py::arg("dilations"), py::arg("kernel") = 3);

  m.def(
      "model_stats",
      [](const std::string& preset, const std::string& residual) {
        GeneratorSpec spec = GeneratorSpec::preset(preset);
        if (!residual.empty()) spec.residual = parse_residual(residual);
        const ModelStats s = model_stats(spec);
        py::dict d;
        d["variant"] = variant_name(spec.variant);
        d["parameters"] = s.parameter_count;
        d["gflops"] = s.flops_per_second_of_audio / 1e9;
        d["receptive_field"] = s.receptive_field_samples;
        d["context_frames"] = s.context_frames;
        return d;
      },
      py::arg("preset"), py::arg("residual") = "",
      "Parameter count, GFLOPS per second of audio and receptive field of a preset.");

  m.def(
      "stft_magnitude",
      [](const Array& x, std::size_t fft, std::size_t win, std::size_t hop, double floor) {
        const Spectrogram s = stft_magnitude(to_vector(x), {fft, win, hop}, floor);
        return matrix(s.values, s.frames, s.bins);
      },
      py::arg("samples"), py::arg("fft_size") = 1024, py::arg("window_size") = 600,
      py::arg("hop_size") = 120, py::arg("floor") = 1e-7);

  m.def(
      "mel_spectrogram",
      [](const Array& x, int sample_rate, std::size_t n_mels) {
        AudioBuffer a;
        a.samples = to_vector(x);
        a.sample_rate = sample_rate;
        MelConfig c;
        c.n_mels = n_mels;
        const MelSpectrogram mel = mel_spectrogram(a, c);
        return matrix(mel.values, mel.frames, mel.n_mels);
      },
      py::arg("samples"), py::arg("sample_rate") = 16000, py::arg("n_mels") = 80,
      "Log-mel features [frames x n_mels]; 200-sample hop, 800-sample window.");

  m.def(
      "read_wav",
      [](const std::string& path) {
        const AudioBuffer a = wav_read(path);
        return py::make_tuple(vector_array(a.samples), a.sample_rate);
      },
      py::arg("path"));
  m.def(
      "write_wav",
      [](const std::string& path, const Array& x, int sample_rate) {
        AudioBuffer a;
        a.samples = to_vector(x);
        a.sample_rate = sample_rate;
        wav_write(path, a);
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate") = 16000);

  py::class_<PqmfBank>(m, "PqmfBank")
      .def_readonly("num_bands", &PqmfBank::num_bands)
      .def_readonly("taps", &PqmfBank::taps)
      .def_readonly("kaiser_beta", &PqmfBank::kaiser_beta)
      .def_readonly("cutoff_ratio", &PqmfBank::cutoff_ratio)
      .def_property_readonly("delay", &PqmfBank::delay)
      .def_property_readonly("prototype", [](const PqmfBank& b) { return vector_array(b.prototype); })
      .def_property_readonly("analysis_filters", [](const PqmfBank& b) { return rows_array(b.analysis); })
      .def_property_readonly("synthesis_filters",
                             [](const PqmfBank& b) { return rows_array(b.synthesis); })
      .def("analyze", [](const PqmfBank& b, const Array& x) { return rows_array(analyze(b, to_vector(x))); },
           py::arg("samples"), "Full band [L] -> sub-bands [bands x L/bands].")
      .def(
          "synthesize",
          [](const PqmfBank& b, const Array& bands, std::size_t advance) {
            if (bands.ndim() != 2) throw ShapeError("bands must be [bands x T]");
            SubBands s(static_cast<std::size_t>(bands.shape(0)));
            const auto t = static_cast<std::size_t>(bands.shape(1));
            for (std::size_t k = 0; k < s.size(); ++k)
              s[k].assign(bands.data() + k * t, bands.data() + (k + 1) * t);
            return vector_array(synthesize(b, s, advance));
          },
          py::arg("bands"), py::arg("advance") = 0)
      .def("round_trip_snr_db",
           [](const PqmfBank& b, const Array& x) { return round_trip_snr_db(b, to_vector(x)); })
      .def("stopband_attenuation_db", [](const PqmfBank& b) { return stopband_attenuation_db(b); })
      .def("impulse_snr_db", [](const PqmfBank& b) { return impulse_reconstruction_snr_db(b); });

  m.def(
      "design_pqmf",
      [](std::size_t bands, std::size_t taps, double beta) {
        PqmfDesignOptions o;
        o.num_bands = bands;
        o.taps = taps;
        o.kaiser_beta = beta;
        return design_pqmf(o);
      },
      py::arg("num_bands") = 4, py::arg("taps") = 64, py::arg("kaiser_beta") = 9.0);

  m.def(
      "write_random_model",
      [](const std::string& preset, const std::string& path, std::uint64_t seed) {
        const GeneratorSpec spec = GeneratorSpec::preset(preset);
        const Generator gen(spec, seed);
        std::optional<PqmfBank> bank;
        if (spec.variant == Variant::MB) bank = design_pqmf();
        write_checkpoint(path, make_model_checkpoint(gen, MelConfig{}, nullptr, bank ? &*bank : nullptr),
                         TensorDtype::F32);
      },
      py::arg("preset"), py::arg("path"), py::arg("seed") = 1,
      "Writes a randomly initialized model checkpoint.");

  py::class_<Vocoder>(m, "Vocoder")
      .def(py::init(&Vocoder::load), py::arg("checkpoint"))
      .def_property_readonly("variant", [](const Vocoder& v) { return variant_name(v.spec().variant); })
      .def_property_readonly("n_mels", [](const Vocoder& v) { return v.spec().n_mels; })
      .def_property_readonly("context_frames", &Vocoder::context_frames)
      .def_property_readonly("has_stats", &Vocoder::has_stats)
      .def(
          "synthesize",
          [](const Vocoder& v, const Array& mel, std::size_t chunk_frames, std::size_t threads) {
            const MelSpectrogram m = mel_from_array(mel);
            std::vector<double> out;
            {
              py::gil_scoped_release release;
              out = v.synthesize(m, chunk_frames, threads);
            }
            return vector_array(out);
          },
          py::arg("mel"), py::arg("chunk_frames") = 0, py::arg("threads") = 1,
          "Raw log-mel [frames x n_mels] -> waveform of 200 * frames samples.")
      .def(
          "bench",
          [](const Vocoder& v, double seconds, std::size_t threads, std::size_t iterations) {
            BenchOptions o;
            o.seconds = seconds;
            o.threads = threads;
            o.iterations = iterations;
            BenchReport r;
            {
              py::gil_scoped_release release;
              r = bench(v, o);
            }
            py::dict d;
            d["rtf"] = r.rtf;
            d["samples_per_second"] = r.samples_per_second;
            d["wall_seconds"] = r.wall_seconds;
            d["audio_seconds"] = r.audio_seconds;
            d["thread_count"] = r.thread_count;
            d["warmup"] = r.warmup;
            d["iterations"] = r.iterations;
            return d;
          },
          py::arg("seconds") = 1.0, py::arg("threads") = 1, py::arg("iterations") = 3);
}
