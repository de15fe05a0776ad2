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

#include "acfm/dsp_frontend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "acfm/error.hpp"
#include "acfm/spectrogram.hpp"

namespace acfm {
namespace {

// Pole Q factors of a 4th-order Butterworth split into two biquads:
// 1 / (2 cos(pi/8)) and 1 / (2 cos(3 pi/8)).
const std::array<double, 2> kButterworth4Q = {
    1.0 / (2.0 * std::cos(std::numbers::pi / 8.0)),
    1.0 / (2.0 * std::cos(3.0 * std::numbers::pi / 8.0)),
};

void require_canonical_rate(const AudioClip& clip, const char* what) {
  if (clip.sample_rate_hz != kCanonicalSampleRate) {
    throw Error(ErrorCode::kWrongSampleRate, std::string(what) + " expects 16000 Hz, got " +
                                                 std::to_string(clip.sample_rate_hz));
  }
}

}  // namespace

std::complex<double> BiquadCoeffs::response(double freq_hz, double sample_rate_hz) const {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

bool BiquadCoeffs::is_stable() const {
  // Jury conditions for z^2 + a1 z + a2.
  return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

BiquadCoeffs design_lowpass(double f0_hz, double q, double sample_rate_hz) {
  const double w0 = 2.0 * std::numbers::pi * f0_hz / sample_rate_hz;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  BiquadCoeffs c;
  c.b0 = (1.0 - cw) / 2.0 / a0;
  c.b1 = (1.0 - cw) / a0;
  c.b2 = c.b0;
  c.a1 = -2.0 * cw / a0;
  c.a2 = (1.0 - alpha) / a0;
  return c;
}

BiquadCoeffs design_highpass(double f0_hz, double q, double sample_rate_hz) {
  const double w0 = 2.0 * std::numbers::pi * f0_hz / sample_rate_hz;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  BiquadCoeffs c;
  c.b0 = (1.0 + cw) / 2.0 / a0;
  c.b1 = -(1.0 + cw) / a0;
  c.b2 = c.b0;
  c.a1 = -2.0 * cw / a0;
  c.a2 = (1.0 - alpha) / a0;
  return c;
}

FilterCascade::FilterCascade(std::vector<BiquadCoeffs> stages)
    : stages_(std::move(stages)), state_(stages_.size()) {
  for (const BiquadCoeffs& c : stages_) {
    if (!c.is_stable()) throw Error(ErrorCode::kBadConfig, "biquad has a pole outside the unit circle");
  }
}

void FilterCascade::process(std::span<const double> in, std::span<double> out) {
  if (in.size() != out.size()) throw Error(ErrorCode::kLengthMismatch, "filter in/out sizes differ");
  for (std::size_t n = 0; n < in.size(); ++n) out[n] = process(in[n]);
}

void FilterCascade::reset() { std::fill(state_.begin(), state_.end(), State{}); }

double FilterCascade::magnitude_response(double freq_hz, double sample_rate_hz) const {
  std::complex<double> h = 1.0;
  for (const BiquadCoeffs& c : stages_) h *= c.response(freq_hz, sample_rate_hz);
  return std::abs(h);
}

FilterCascade design_bandpass() {
  const double fs = kCanonicalSampleRate;
  return FilterCascade({
      design_highpass(kBandLowHz, kButterworth4Q[0], fs),
      design_highpass(kBandLowHz, kButterworth4Q[1], fs),
      design_lowpass(kBandHighHz, kButterworth4Q[0], fs),
      design_lowpass(kBandHighHz, kButterworth4Q[1], fs),
  });
}

AudioClip apply_filter(FilterCascade& cascade, const AudioClip& clip) {
  require_canonical_rate(clip, "apply_filter");
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.resize(clip.samples.size());
  cascade.process(clip.samples, out.samples);
  return out;
}

NoiseProfile estimate_noise_profile(const AudioClip& noise_clip) {
  require_canonical_rate(noise_clip, "estimate_noise_profile");
  const ComplexSpectra spectra = stft(noise_clip);
  const std::size_t bins = spectra.config.num_bins();
  NoiseProfile profile;
  profile.mean_magnitude.assign(bins, 0.0);
  for (std::size_t t = 0; t < spectra.num_frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) profile.mean_magnitude[k] += std::abs(spectra.at(t, k));
  }
  for (double& m : profile.mean_magnitude) m /= static_cast<double>(spectra.num_frames);
  return profile;
}

void subtract_magnitudes(ComplexSpectra& spectra, const NoiseProfile& profile,
                         const SubtractionParams& params) {
  if (!(params.alpha >= 0.0) || !(params.beta >= 0.0 && params.beta < 1.0)) {
    throw Error(ErrorCode::kBadConfig, "spectral subtraction needs alpha >= 0 and 0 <= beta < 1");
  }
  const std::size_t bins = spectra.config.num_bins();
  if (profile.mean_magnitude.size() != bins) {
    throw Error(ErrorCode::kProfileLengthMismatch,
                "noise profile has " + std::to_string(profile.mean_magnitude.size()) +
                    " bins, expected " + std::to_string(bins));
  }
  for (std::size_t t = 0; t < spectra.num_frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      std::complex<double>& y = spectra.at(t, k);
      const double mag = std::abs(y);
      if (mag == 0.0) continue;
      const double enhanced =
          std::max(mag - params.alpha * profile.mean_magnitude[k], params.beta * mag);
      y *= enhanced / mag;
    }
  }
}

AudioClip spectral_subtract(const AudioClip& clip, const NoiseProfile& profile,
                            const SubtractionParams& params) {
  require_canonical_rate(clip, "spectral_subtract");
  ComplexSpectra spectra = stft(clip);
  subtract_magnitudes(spectra, profile, params);
  return istft(spectra);
}

}  // namespace acfm
