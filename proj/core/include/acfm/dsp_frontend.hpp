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
#include <span>
#include <vector>

#include "acfm/audio_io.hpp"
#include "acfm/spectrogram.hpp"

namespace acfm {

inline constexpr double kBandLowHz = 100.0;
inline constexpr double kBandHighHz = 1200.0;

// Second-order section with a0 normalized to 1:
//   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct BiquadCoeffs {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;

  std::complex<double> response(double freq_hz, double sample_rate_hz) const;
  // Both poles strictly inside the unit circle.
  bool is_stable() const;
};

// Bilinear transform with the corner prewarped onto f0.
BiquadCoeffs design_lowpass(double f0_hz, double q, double sample_rate_hz);
BiquadCoeffs design_highpass(double f0_hz, double q, double sample_rate_hz);

// Stateful cascade of transposed direct-form II biquads. Filtering a stream
// chunk by chunk gives bitwise the same output as filtering it whole.
// Single owner; movable between threads.
class FilterCascade {
 public:
  FilterCascade() = default;
  explicit FilterCascade(std::vector<BiquadCoeffs> stages);

  const std::vector<BiquadCoeffs>& stages() const { return stages_; }

  double process(double x) {
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      const BiquadCoeffs& c = stages_[i];
      State& s = state_[i];
      const double y = c.b0 * x + s.z1;
      s.z1 = c.b1 * x - c.a1 * y + s.z2;
      s.z2 = c.b2 * x - c.a2 * y;
      x = y;
    }
    return x;
  }

  void process(std::span<const double> in, std::span<double> out);
  void reset();

  // Product of the stage responses.
  double magnitude_response(double freq_hz, double sample_rate_hz = kCanonicalSampleRate) const;

 private:
  struct State {
    double z1 = 0.0;
    double z2 = 0.0;
  };
  std::vector<BiquadCoeffs> stages_;
  std::vector<State> state_;
};

// 4th-order Butterworth highpass at 100 Hz followed by 4th-order
// Butterworth lowpass at 1200 Hz, fs = 16 kHz, zeroed state.
FilterCascade design_bandpass();

// Filters through the cascade, advancing its state. Requires 16 kHz.
AudioClip apply_filter(FilterCascade& cascade, const AudioClip& clip);

// Mean STFT magnitude per bin (513 bins).
struct NoiseProfile {
  std::vector<double> mean_magnitude;
};

NoiseProfile estimate_noise_profile(const AudioClip& noise_clip);

struct SubtractionParams {
  // Over-subtraction factor.
  double alpha = 2.0;
  // Spectral floor relative to the noisy magnitude.
  double beta = 0.01;
};

// In-place bin-wise step of spectral_subtract.
void subtract_magnitudes(ComplexSpectra& spectra, const NoiseProfile& profile,
                         const SubtractionParams& params = {});

// Magnitude spectral subtraction with the noisy phase:
//   |S| = max(|Y| - alpha * profile, beta * |Y|)
AudioClip spectral_subtract(const AudioClip& clip, const NoiseProfile& profile,
                            const SubtractionParams& params = {});

}  // namespace acfm
