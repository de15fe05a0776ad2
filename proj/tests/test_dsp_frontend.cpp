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

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "acfm/dsp_frontend.hpp"
#include "acfm/error.hpp"
#include "acfm/spectrogram.hpp"
#include "test_util.hpp"

namespace acfm {
namespace {

constexpr double kFs = 16000.0;

AudioClip add(const AudioClip& a, const AudioClip& b) {
  AudioClip out = a;
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += b.samples[i];
  return out;
}

// Ratio in dB of mean STFT power in bins [peak-3, peak+3] to the mean
// power of all other bins.
double band_snr_db(const AudioClip& clip, std::size_t peak_bin) {
  const ComplexSpectra s = stft(clip);
  double sig = 0.0, noise = 0.0;
  std::size_t n_sig = 0, n_noise = 0;
  for (std::size_t t = 0; t < s.num_frames; ++t) {
    for (std::size_t k = 0; k < s.config.num_bins(); ++k) {
      const double p = std::norm(s.at(t, k));
      if (k + 3 >= peak_bin && k <= peak_bin + 3) {
        sig += p;
        ++n_sig;
      } else {
        noise += p;
        ++n_noise;
      }
    }
  }
  return 10.0 * std::log10((sig / n_sig) / (noise / n_noise));
}

TEST(Biquad, DesignsAreStable) {
  const FilterCascade bp = design_bandpass();
  ASSERT_EQ(bp.stages().size(), 4u);
  for (const BiquadCoeffs& c : bp.stages()) EXPECT_TRUE(c.is_stable());
  EXPECT_FALSE((BiquadCoeffs{1.0, 0.0, 0.0, 0.0, 1.0}).is_stable());
}

TEST(Bandpass, MatchesAnalogButterworthOracle) {
  const FilterCascade bp = design_bandpass();
  for (double f : {30.0, 50.0, 100.0, 150.0, 200.0, 400.0, 600.0, 800.0, 1000.0, 1200.0, 2000.0, 4800.0, 7000.0}) {
    const double oracle = testing::butterworth_band_gain(f, kBandLowHz, kBandHighHz, kFs);
    EXPECT_NEAR(bp.magnitude_response(f), oracle, 1e-9) << f << " Hz";
  }
  // Frozen oracle values.
  EXPECT_NEAR(bp.magnitude_response(50.0), 0.062354, 1e-6);
  EXPECT_NEAR(bp.magnitude_response(600.0), 0.998260, 1e-6);
  EXPECT_NEAR(bp.magnitude_response(4800.0), 0.000926, 1e-6);
}

TEST(Bandpass, PassbandAndStopband) {
  const FilterCascade bp = design_bandpass();
  for (double f = 200.0; f <= 1000.0; f += 10.0) EXPECT_GE(bp.magnitude_response(f), 0.9) << f;
  EXPECT_LE(bp.magnitude_response(50.0), 0.1);
  EXPECT_LE(bp.magnitude_response(4800.0), 0.1);
}

TEST(ApplyFilter, ZeroInZeroOut) {
  FilterCascade bp = design_bandpass();
  const AudioClip y = apply_filter(bp, AudioClip{std::vector<double>(4000, 0.0), 16000});
  for (double v : y.samples) ASSERT_EQ(v, 0.0);
}

TEST(ApplyFilter, SteadyStateSineAmplitude) {
  FilterCascade bp = design_bandpass();
  const AudioClip y = apply_filter(bp, testing::sine(600.0, 1.0, 16000));
  double peak = 0.0;
  for (std::size_t i = 8000; i < y.samples.size(); ++i) peak = std::max(peak, std::abs(y.samples[i]));
  EXPECT_GE(peak, 0.9);
  EXPECT_LE(peak, 1.0);
}

TEST(ApplyFilter, RejectsWrongRate) {
  FilterCascade bp = design_bandpass();
  EXPECT_EQ(testing::error_code_of([&] { apply_filter(bp, AudioClip{{0.0, 1.0}, 8000}); }),
            ErrorCode::kWrongSampleRate);
}

TEST(ApplyFilter, ChunkedEqualsWhole) {
  const AudioClip x = testing::white_noise(0.3, 3000, 4);
  FilterCascade whole = design_bandpass();
  const AudioClip ref = apply_filter(whole, x);

  FilterCascade chunked = design_bandpass();
  const AudioClip a = apply_filter(chunked, AudioClip{{x.samples.begin(), x.samples.begin() + 1000}, 16000});
  const AudioClip b = apply_filter(chunked, AudioClip{{x.samples.begin() + 1000, x.samples.end()}, 16000});
  std::vector<double> joined = a.samples;
  joined.insert(joined.end(), b.samples.begin(), b.samples.end());
  EXPECT_EQ(joined, ref.samples);

  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 10; ++trial) {
    FilterCascade c = design_bandpass();
    std::vector<double> out(x.samples.size());
    std::size_t pos = 0;
    while (pos < x.samples.size()) {
      const std::size_t len = std::min<std::size_t>(1 + gen() % 700, x.samples.size() - pos);
      c.process(std::span<const double>(x.samples).subspan(pos, len), std::span<double>(out).subspan(pos, len));
      pos += len;
    }
    ASSERT_EQ(out, ref.samples);
  }
}

TEST(ApplyFilter, ImpulseResponseDecays) {
  AudioClip impulse{std::vector<double>(20000, 0.0), 16000};
  impulse.samples[0] = 1.0;
  FilterCascade bp = design_bandpass();
  const AudioClip y = apply_filter(bp, impulse);
  for (std::size_t n = 16001; n < y.samples.size(); ++n) ASSERT_LT(std::abs(y.samples[n]), 1e-6) << n;
}

TEST(ApplyFilter, Linearity) {
  const AudioClip x = testing::white_noise(0.2, 5000, 12);
  FilterCascade base = design_bandpass();
  const AudioClip y = apply_filter(base, x);
  for (double a : {0.25, 2.0, -4.0, 0.3, -1.7}) {
    AudioClip scaled = x;
    for (double& s : scaled.samples) s *= a;
    FilterCascade c = design_bandpass();
    const AudioClip ys = apply_filter(c, scaled);
    const bool pow2 = std::abs(std::log2(std::abs(a)) - std::round(std::log2(std::abs(a)))) == 0.0;
    for (std::size_t i = 0; i < y.samples.size(); ++i) {
      if (pow2) {
        ASSERT_EQ(ys.samples[i], a * y.samples[i]);
      } else {
        ASSERT_LE(std::abs(ys.samples[i] - a * y.samples[i]), 1e-12 * std::max(1.0, std::abs(a * y.samples[i])));
      }
    }
  }
}

TEST(NoiseProfile, ShapeAndPeak) {
  const NoiseProfile zero = estimate_noise_profile(AudioClip{std::vector<double>(kCanonicalClipLength, 0.0), 16000});
  ASSERT_EQ(zero.mean_magnitude.size(), 513u);
  for (double v : zero.mean_magnitude) EXPECT_EQ(v, 0.0);

  const NoiseProfile tone = estimate_noise_profile(testing::sine(500.0, 0.5, kCanonicalClipLength));
  ASSERT_EQ(tone.mean_magnitude.size(), 513u);
  const auto peak = std::max_element(tone.mean_magnitude.begin(), tone.mean_magnitude.end());
  EXPECT_EQ(peak - tone.mean_magnitude.begin(), 32);
}

TEST(SpectralSubtract, ZeroProfileIsRoundTrip) {
  const AudioClip x = add(testing::sine(600.0, 0.5, kCanonicalClipLength),
                          testing::white_noise(0.05, kCanonicalClipLength, 2));
  const NoiseProfile zero{std::vector<double>(513, 0.0)};
  const AudioClip y = spectral_subtract(x, zero, {3.0, 0.01});
  const AudioClip ref = istft(stft(x));
  ASSERT_EQ(y.samples.size(), ref.samples.size());
  double peak = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    peak = std::max(peak, std::abs(x.samples[i]));
    worst = std::max(worst, std::abs(y.samples[i] - ref.samples[i]));
  }
  EXPECT_LE(worst, 1e-6 * peak);
}

TEST(SpectralSubtract, ImprovesBandSnrByTenDb) {
  const AudioClip noise = testing::white_noise(0.05, kCanonicalClipLength, 21);
  const AudioClip x = add(testing::sine(600.0, 0.5, kCanonicalClipLength), noise);
  // Profile from a separate realization of the same noise source.
  const NoiseProfile profile = estimate_noise_profile(testing::white_noise(0.05, kCanonicalClipLength, 22));
  const std::size_t peak_bin = 38;  // 600 * 1024 / 16000 = 38.4
  const double before = band_snr_db(x, peak_bin);
  const double after = band_snr_db(spectral_subtract(x, profile), peak_bin);
  EXPECT_GE(after - before, 10.0) << "before " << before << " dB, after " << after << " dB";
}

TEST(SpectralSubtract, BetaFloorHolds) {
  const AudioClip noise = testing::white_noise(0.1, kCanonicalClipLength, 8);
  const NoiseProfile profile = estimate_noise_profile(noise);
  const SubtractionParams params{1.0, 0.01};
  const ComplexSpectra in = stft(noise);
  ComplexSpectra out = in;
  subtract_magnitudes(out, profile, params);
  std::size_t floored = 0;
  for (std::size_t i = 0; i < in.bins.size(); ++i) {
    const double y = std::abs(in.bins[i]);
    const double s = std::abs(out.bins[i]);
    ASSERT_GE(s, params.beta * y * (1.0 - 1e-12));
    ASSERT_LE(s, y * (1.0 + 1e-12));
    if (std::abs(s - params.beta * y) <= 1e-12 * y) ++floored;
  }
  // Noise subtracted from itself lands on the floor for a sizeable share of bins.
  EXPECT_GT(floored, in.bins.size() / 4);
}

TEST(SpectralSubtract, NeverProducesNonFinite) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 5; ++trial) {
    AudioClip x{std::vector<double>(kCanonicalClipLength), 16000};
    for (double& s : x.samples) s = trial == 0 ? 0.0 : u(gen);
    NoiseProfile p{std::vector<double>(513)};
    for (double& v : p.mean_magnitude) v = std::abs(u(gen)) * 1e3;
    for (double alpha : {0.0, 1.0, 50.0}) {
      const AudioClip y = spectral_subtract(x, p, {alpha, 0.01});
      for (double s : y.samples) ASSERT_TRUE(std::isfinite(s));
    }
  }
}

TEST(SpectralSubtract, ProfileLengthMustMatch) {
  const AudioClip x = testing::sine(600.0, 0.5, 4096);
  EXPECT_EQ(testing::error_code_of([&] { spectral_subtract(x, NoiseProfile{std::vector<double>(100, 0.0)}); }),
            ErrorCode::kProfileLengthMismatch);
}

}  // namespace
}  // namespace acfm
