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

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "acfm/audio_io.hpp"
#include "acfm/labels.hpp"

namespace acfm {

// Deterministic surrogates for the three recording conditions:
//   ambient          lowpassed Gaussian room noise plus 60 Hz hum
//   extruder_normal  FM harmonic stack (f0 in [220, 280] Hz) at 10 dB SNR
//   extruder_fault   the same stack with gate dropouts and broadband
//                    clicks, at 5 dB SNR
// Every clip is a pure function of (label, seed, length).
struct SynthParams {
  ClassLabel label = ClassLabel::kAmbient;
  std::uint64_t seed = 0;
  std::size_t num_samples = kCanonicalClipLength;
};

inline constexpr double kSynthPeak = 0.8;

// Peak-normalized to 0.8, 16 kHz.
AudioClip synth_clip(const SynthParams& params);

inline AudioClip synth_clip(ClassLabel label, std::uint64_t seed) {
  return synth_clip(SynthParams{label, seed, kCanonicalClipLength});
}

// Class for dataset index i: i mod 3, so remainders go to ambient first,
// then extruder_normal.
ClassLabel dataset_label(std::size_t index);

// Writes `count` clips plus manifest.jsonl into out_dir and returns the
// manifest path. Clip i uses seed derive_seed(seed, i).
std::filesystem::path synth_dataset(std::size_t count, std::uint64_t seed,
                                    const std::filesystem::path& out_dir);

}  // namespace acfm
