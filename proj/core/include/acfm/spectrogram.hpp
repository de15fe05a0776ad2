// Copyright 2026 The acfm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "acfm/audio_io.hpp"

namespace acfm {

// Periodic Hann, 50% overlap. hop = window_len / 2 keeps overlap-add
// constant.
struct StftConfig {
  std::size_t window_len = 1024;
  std::size_t hop = 512;
  int sample_rate_hz = kCanonicalSampleRate;

  std::size_t num_bins() const { return window_len / 2 + 1; }
};

inline constexpr std::size_t kNumMelBins = 64;
inline constexpr std::size_t kNumFrames = 64;
inline constexpr double kMelMinHz = 50.0;
inline constexpr double kMelMaxHz = 2000.0;

// T frames by W/2+1 bins, frame-major.
struct ComplexSpectra {
  std::size_t num_frames = 0;
  StftConfig config;
  std::vector<std::complex<double>> bins;
  // Length of the analysed signal; istft reproduces it.
  std::size_t signal_length = 0;

  std::complex<double>& at(std::size_t frame, std::size_t bin) {
    return bins[frame * config.num_bins() + bin];
  }
  const std::complex<double>& at(std::size_t frame, std::size_t bin) const {
    return bins[frame * config.num_bins() + bin];
  }
};

// A 64x64 log-mel image. values are mel-major: values[mel * 64 + frame],
// mel 0 being the lowest band. pixels are row-major HWC with the same row
// order, channels = 1 (grayscale) or 3 (colored); empty until render().
struct SpectrogramImage {
  static constexpr std::size_t kHeight = kNumMelBins;
  static constexpr std::size_t kWidth = kNumFrames;

  std::vector<double> values;
  std::size_t channels = 0;
  std::vector<float> pixels;

  double value(std::size_t mel, std::size_t frame) const { return values[mel * kWidth + frame]; }
};

std::vector<double> hann_window(std::size_t length);

// Frame t covers samples [t*H, t*H + W). Throws kClipTooShort when the clip
// is shorter than one window.
ComplexSpectra stft(const AudioClip& clip, const StftConfig& cfg = {});

// Weighted overlap-add: each inverse frame is multiplied by the window and
// the sum is divided by the overlap-added squared window (floored at 1e-8).
AudioClip istft(const ComplexSpectra& spectra);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters, row-major n_mel x (W/2+1), each row peak-normalized
// to 1. Throws kBadRange unless 0 <= f_min < f_max <= sr/2.
std::vector<double> mel_filterbank(std::size_t n_mel = kNumMelBins, double f_min = kMelMinHz,
                                   double f_max = kMelMaxHz, std::size_t window_len = 1024,
                                   int sample_rate_hz = kCanonicalSampleRate);

// Center frequency (Hz) of each mel filter.
std::vector<double> mel_center_frequencies(std::size_t n_mel = kNumMelBins,
                                           double f_min = kMelMinHz, double f_max = kMelMaxHz);

// Min-max normalized log10 mel power of a canonical 33280-sample clip.
SpectrogramImage mel_spectrogram(const AudioClip& clip);

// Grayscale copies values; colored maps each value through a fixed
// five-point colormap.
SpectrogramImage render(const SpectrogramImage& spec, bool colored);

// Colormap lookup for one value in [0, 1].
std::array<double, 3> colormap(double v);

// Binary PGM (P5) or PPM (P6), maxval 255, highest mel band on the top row.
void export_image(const SpectrogramImage& spec, const std::filesystem::path& path);

}  // namespace acfm
