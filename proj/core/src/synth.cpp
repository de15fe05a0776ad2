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

#include "acfm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "acfm/error.hpp"
#include "acfm/random.hpp"

namespace acfm {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRate = kCanonicalSampleRate;

double mean_power(const std::vector<double>& x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return x.empty() ? 0.0 : sum / static_cast<double>(x.size());
}

void scale_to_peak(std::vector<double>& x, double peak) {
  double max_abs = 0.0;
  for (double v : x) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) return;
  const double gain = peak / max_abs;
  for (double& v : x) v *= gain;
}

// Unit-RMS Gaussian noise through y[n] = 0.95 y[n-1] + 0.05 x[n], plus a
// 60 Hz hum at 0.1 of the noise RMS.
std::vector<double> ambient_noise(SplitMix64& rng, std::size_t n) {
  std::vector<double> y(n);
  double state = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    state = 0.95 * state + 0.05 * rng.gaussian();
    y[i] = state;
  }
  const double rms = std::sqrt(mean_power(y));
  if (rms > 0.0) {
    for (double& v : y) v /= rms;
  }
  const double hum_phase = rng.uniform(0.0, kTwoPi);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += 0.1 * std::sin(kTwoPi * 60.0 * static_cast<double>(i) / kRate + hum_phase);
  }
  return y;
}

// Harmonics 1..6 with amplitude 1/k on a fundamental that wobbles +/-1% at
// 0.5 Hz. Unit peak.
std::vector<double> harmonic_stack(SplitMix64& rng, std::size_t n) {
  constexpr int kHarmonics = 6;
  const double f0 = rng.uniform(220.0, 280.0);
  const double fm_phase = rng.uniform(0.0, kTwoPi);
  std::array<double, kHarmonics> phases{};
  for (double& p : phases) p = rng.uniform(0.0, kTwoPi);

  std::vector<double> x(n);
  double theta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kRate;
    double v = 0.0;
    for (int k = 1; k <= kHarmonics; ++k) v += std::sin(k * theta + phases[k - 1]) / k;
    x[i] = v;
    const double inst_freq = f0 * (1.0 + 0.01 * std::sin(kTwoPi * 0.5 * t + fm_phase));
    theta = std::fmod(theta + kTwoPi * inst_freq / kRate, kTwoPi);
  }
  scale_to_peak(x, 1.0);
  return x;
}

// Adds noise scaled so that power(signal) / power(noise) = snr_db.
void mix_at_snr(std::vector<double>& signal, const std::vector<double>& noise, double snr_db) {
  const double ps = mean_power(signal);
  const double pn = mean_power(noise);
  if (pn == 0.0) return;
  const double gain = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
  for (std::size_t i = 0; i < signal.size(); ++i) signal[i] += gain * noise[i];
}

// Gate closes for Uniform[50, 150] ms at Poisson(3/s) arrivals.
void apply_dropouts(SplitMix64& rng, std::vector<double>& x) {
  const double duration = static_cast<double>(x.size()) / kRate;
  double t = rng.exponential(3.0);
  while (t < duration) {
    const double len = rng.uniform(0.050, 0.150);
    const auto begin = static_cast<std::size_t>(t * kRate);
    const auto end = std::min(x.size(), static_cast<std::size_t>((t + len) * kRate));
    for (std::size_t i = begin; i < end; ++i) x[i] = 0.0;
    t += rng.exponential(3.0);
  }
}

// Exponentially decaying (tau = 5 ms) white bursts of amplitude 0.6 at
// Poisson(10/s) arrivals, each lasting five time constants.
void add_clicks(SplitMix64& rng, std::vector<double>& x) {
  constexpr double kTau = 0.005;
  constexpr double kAmplitude = 0.6;
  const auto tau_samples = kTau * kRate;
  const auto burst_len = static_cast<std::size_t>(5.0 * tau_samples);
  const double duration = static_cast<double>(x.size()) / kRate;
  double t = rng.exponential(10.0);
  while (t < duration) {
    const auto begin = static_cast<std::size_t>(t * kRate);
    for (std::size_t j = 0; j < burst_len && begin + j < x.size(); ++j) {
      x[begin + j] += kAmplitude * std::exp(-static_cast<double>(j) / tau_samples) * rng.gaussian();
    }
    t += rng.exponential(10.0);
  }
}

}  // namespace

AudioClip synth_clip(const SynthParams& params) {
  SplitMix64 rng(derive_seed(params.seed, 0x5EED0000ULL + label_index(params.label)));
  const std::size_t n = params.num_samples;

  std::vector<double> x;
  switch (params.label) {
    case ClassLabel::kAmbient:
      x = ambient_noise(rng, n);
      break;
    case ClassLabel::kExtruderNormal: {
      x = harmonic_stack(rng, n);
      mix_at_snr(x, ambient_noise(rng, n), 10.0);
      break;
    }
    case ClassLabel::kExtruderFault: {
      x = harmonic_stack(rng, n);
      apply_dropouts(rng, x);
      add_clicks(rng, x);
      mix_at_snr(x, ambient_noise(rng, n), 5.0);
      break;
    }
  }
  scale_to_peak(x, kSynthPeak);

  AudioClip clip;
  clip.sample_rate_hz = kCanonicalSampleRate;
  clip.samples = std::move(x);
  return clip;
}

ClassLabel dataset_label(std::size_t index) { return label_from_index(index % kNumClasses); }

std::filesystem::path synth_dataset(std::size_t count, std::uint64_t seed,
                                    const std::filesystem::path& out_dir) {
  if (count < kNumClasses) {
    throw Error(ErrorCode::kBadConfig, "synth_dataset needs count >= 3");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<LabeledExample> examples;
  examples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const ClassLabel label = dataset_label(i);
    char name[64];
    std::snprintf(name, sizeof(name), "clip_%04zu_%s.wav", i, label_name(label).data());
    write_wav(synth_clip(label, derive_seed(seed, i)), out_dir / name);
    examples.push_back({name, label, std::nullopt});
  }
  const std::filesystem::path manifest = out_dir / "manifest.jsonl";
  write_manifest(examples, manifest);
  return manifest;
}

}  // namespace acfm
