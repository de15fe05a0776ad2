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

#include "acfm/spectrogram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "acfm/error.hpp"
#include "acfm/fft.hpp"

namespace acfm {
namespace {

constexpr double kWolaFloor = 1e-8;
constexpr double kLogFloor = 1e-10;

constexpr std::array<double, 5> kColormapStops = {0.0, 0.25, 0.5, 0.75, 1.0};
constexpr std::array<std::array<double, 3>, 5> kColormapRgb = {{
    {0.267, 0.005, 0.329},
    {0.229, 0.322, 0.545},
    {0.127, 0.566, 0.551},
    {0.369, 0.789, 0.383},
    {0.993, 0.906, 0.144},
}};

void check_config(const StftConfig& cfg) {
  if (cfg.window_len < 2 || cfg.hop == 0 || cfg.hop > cfg.window_len) {
    throw Error(ErrorCode::kBadConfig, "invalid STFT window/hop");
  }
}

const FftPlan& plan_for(std::size_t size) {
  static const FftPlan canonical(1024);
  if (size == canonical.size()) return canonical;
  thread_local std::unique_ptr<FftPlan> other;
  if (!other || other->size() != size) other = std::make_unique<FftPlan>(size);
  return *other;
}

const std::vector<double>& canonical_filterbank() {
  static const std::vector<double> bank = mel_filterbank();
  return bank;
}

}  // namespace

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / length);
  }
  return w;
}

ComplexSpectra stft(const AudioClip& clip, const StftConfig& cfg) {
  check_config(cfg);
  const std::size_t len = clip.samples.size();
  if (len < cfg.window_len) {
    throw Error(ErrorCode::kClipTooShort, "clip has " + std::to_string(len) +
                                              " samples; STFT needs at least " +
                                              std::to_string(cfg.window_len));
  }
  const std::vector<double> window = hann_window(cfg.window_len);
  const FftPlan& plan = plan_for(cfg.window_len);
  const std::size_t bins = cfg.num_bins();

  ComplexSpectra out;
  out.config = cfg;
  out.signal_length = len;
  out.num_frames = (len - cfg.window_len) / cfg.hop + 1;
  out.bins.resize(out.num_frames * bins);

  std::vector<std::complex<double>> frame(cfg.window_len);
  for (std::size_t t = 0; t < out.num_frames; ++t) {
    const std::size_t start = t * cfg.hop;
    for (std::size_t n = 0; n < cfg.window_len; ++n) {
      frame[n] = {window[n] * clip.samples[start + n], 0.0};
    }
    plan.forward(frame);
    std::copy_n(frame.begin(), bins, out.bins.begin() + static_cast<std::ptrdiff_t>(t * bins));
  }
  return out;
}

AudioClip istft(const ComplexSpectra& spectra) {
  const StftConfig& cfg = spectra.config;
  check_config(cfg);
  const std::size_t w_len = cfg.window_len;
  const std::size_t bins = cfg.num_bins();
  const std::vector<double> window = hann_window(w_len);
  const FftPlan& plan = plan_for(w_len);

  const std::size_t covered =
      spectra.num_frames == 0 ? 0 : (spectra.num_frames - 1) * cfg.hop + w_len;
  const std::size_t out_len = std::max(spectra.signal_length, covered);
  std::vector<double> acc(out_len, 0.0);
  std::vector<double> weight(out_len, 0.0);

  std::vector<std::complex<double>> frame(w_len);
  for (std::size_t t = 0; t < spectra.num_frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) frame[k] = spectra.at(t, k);
    // Hermitian extension of the half spectrum.
    for (std::size_t k = bins; k < w_len; ++k) frame[k] = std::conj(frame[w_len - k]);
    plan.inverse(frame);
    const std::size_t start = t * cfg.hop;
    for (std::size_t n = 0; n < w_len; ++n) {
      acc[start + n] += window[n] * frame[n].real() / static_cast<double>(w_len);
      weight[start + n] += window[n] * window[n];
    }
  }

  AudioClip out;
  out.sample_rate_hz = cfg.sample_rate_hz;
  out.samples.resize(spectra.signal_length);
  for (std::size_t n = 0; n < spectra.signal_length; ++n) {
    out.samples[n] = acc[n] / std::max(weight[n], kWolaFloor);
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_center_frequencies(std::size_t n_mel, double f_min, double f_max) {
  const double m_lo = hz_to_mel(f_min);
  const double m_hi = hz_to_mel(f_max);
  const double step = (m_hi - m_lo) / static_cast<double>(n_mel + 1);
  std::vector<double> centers(n_mel);
  for (std::size_t i = 0; i < n_mel; ++i) {
    centers[i] = mel_to_hz(m_lo + step * static_cast<double>(i + 1));
  }
  return centers;
}

std::vector<double> mel_filterbank(std::size_t n_mel, double f_min, double f_max,
                                   std::size_t window_len, int sample_rate_hz) {
  if (n_mel == 0 || window_len < 2 || sample_rate_hz <= 0 || !(f_min >= 0.0) ||
      !(f_min < f_max) || f_max > sample_rate_hz / 2.0) {
    throw Error(ErrorCode::kBadRange, "mel filterbank needs 0 <= f_min < f_max <= sr/2");
  }
  const std::size_t bins = window_len / 2 + 1;
  const double m_lo = hz_to_mel(f_min);
  const double step = (hz_to_mel(f_max) - m_lo) / static_cast<double>(n_mel + 1);
  std::vector<double> edges(n_mel + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(m_lo + step * static_cast<double>(i));
  }

  std::vector<double> bank(n_mel * bins, 0.0);
  const double bin_hz = static_cast<double>(sample_rate_hz) / window_len;
  for (std::size_t m = 0; m < n_mel; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    double row_max = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      const double rising = (f - left) / (center - left);
      const double falling = (right - f) / (right - center);
      const double w = std::max(0.0, std::min(rising, falling));
      bank[m * bins + k] = w;
      row_max = std::max(row_max, w);
    }
    if (row_max <= 0.0) {
      throw Error(ErrorCode::kBadRange,
                  "mel band " + std::to_string(m) + " contains no FFT bin; widen the range");
    }
    // Bins rarely land on the exact center, so rescale to peak 1.
    for (std::size_t k = 0; k < bins; ++k) bank[m * bins + k] /= row_max;
  }
  return bank;
}

SpectrogramImage mel_spectrogram(const AudioClip& clip) {
  if (clip.sample_rate_hz != kCanonicalSampleRate) {
    throw Error(ErrorCode::kWrongSampleRate, "mel_spectrogram expects 16 kHz audio");
  }
  if (clip.samples.size() < kCanonicalClipLength) {
    throw Error(ErrorCode::kClipTooShort,
                "mel_spectrogram expects " + std::to_string(kCanonicalClipLength) + " samples, got " +
                    std::to_string(clip.samples.size()));
  }
  if (clip.samples.size() > kCanonicalClipLength) {
    throw Error(ErrorCode::kShapeMismatch, "mel_spectrogram expects a standardized clip of " +
                                               std::to_string(kCanonicalClipLength) + " samples");
  }
  const ComplexSpectra spectra = stft(clip);
  const std::vector<double>& bank = canonical_filterbank();
  const std::size_t bins = spectra.config.num_bins();

  std::vector<double> power(bins);
  SpectrogramImage image;
  image.values.resize(kNumMelBins * kNumFrames);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < kNumFrames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(spectra.at(t, k));
    for (std::size_t m = 0; m < kNumMelBins; ++m) {
      const double* row = &bank[m * bins];
      double sum = 0.0;
      for (std::size_t k = 0; k < bins; ++k) sum += row[k] * power[k];
      const double logv = std::log10(sum + kLogFloor);
      image.values[m * kNumFrames + t] = logv;
      lo = std::min(lo, logv);
      hi = std::max(hi, logv);
    }
  }
  if (hi == lo) {
    std::fill(image.values.begin(), image.values.end(), 0.0);
  } else {
    const double range = hi - lo;
    for (double& v : image.values) v = (v - lo) / range;
  }
  return image;
}

std::array<double, 3> colormap(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const std::size_t seg = std::min<std::size_t>(static_cast<std::size_t>(v * 4.0), 3);
  const double t = (v - kColormapStops[seg]) * 4.0;
  std::array<double, 3> rgb{};
  for (std::size_t c = 0; c < 3; ++c) {
    rgb[c] = kColormapRgb[seg][c] * (1.0 - t) + kColormapRgb[seg + 1][c] * t;
  }
  return rgb;
}

SpectrogramImage render(const SpectrogramImage& spec, bool colored) {
  if (spec.values.size() != kNumMelBins * kNumFrames) {
    throw Error(ErrorCode::kShapeMismatch, "render expects 64x64 values");
  }
  SpectrogramImage out;
  out.values = spec.values;
  out.channels = colored ? 3 : 1;
  out.pixels.resize(spec.values.size() * out.channels);
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    if (colored) {
      const std::array<double, 3> rgb = colormap(spec.values[i]);
      for (std::size_t c = 0; c < 3; ++c) out.pixels[i * 3 + c] = static_cast<float>(rgb[c]);
    } else {
      out.pixels[i] = static_cast<float>(std::clamp(spec.values[i], 0.0, 1.0));
    }
  }
  return out;
}

void export_image(const SpectrogramImage& spec, const std::filesystem::path& path) {
  const std::size_t channels = spec.channels;
  if ((channels != 1 && channels != 3) ||
      spec.pixels.size() != SpectrogramImage::kHeight * SpectrogramImage::kWidth * channels) {
    throw Error(ErrorCode::kShapeMismatch, "export_image needs rendered pixel data");
  }
  std::string out = channels == 1 ? "P5\n" : "P6\n";
  out += std::to_string(SpectrogramImage::kWidth) + " " +
         std::to_string(SpectrogramImage::kHeight) + "\n255\n";
  const std::size_t row_len = SpectrogramImage::kWidth * channels;
  for (std::size_t r = 0; r < SpectrogramImage::kHeight; ++r) {
    const std::size_t mel = SpectrogramImage::kHeight - 1 - r;
    for (std::size_t i = 0; i < row_len; ++i) {
      const double v = std::clamp(static_cast<double>(spec.pixels[mel * row_len + i]), 0.0, 1.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace acfm
