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
#include <filesystem>
#include <optional>
#include <vector>

#include "acfm/labels.hpp"

namespace acfm {

inline constexpr int kCanonicalSampleRate = 16000;
// 2.08 s: exactly 64 STFT frames at W = 1024, H = 512.
inline constexpr std::size_t kCanonicalClipLength = 33280;

// Mono PCM at a given rate. Samples are nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

enum class Split { kTrain, kTest };

struct LabeledExample {
  std::filesystem::path clip_path;
  ClassLabel label = ClassLabel::kAmbient;
  std::optional<Split> split;
};

// RIFF/WAVE PCM16, mono or stereo. Stereo frames are averaged.
AudioClip read_wav(const std::filesystem::path& path);

// Writes PCM16 mono at the clip's rate, saturating at +/-32767.
void write_wav(const AudioClip& clip, const std::filesystem::path& path);

// Resamples to 16 kHz by linear interpolation (last value held), then
// zero-pads or truncates to target_len.
AudioClip standardize(const AudioClip& clip, std::size_t target_len = kCanonicalClipLength);

// Linear-interpolation resampling only; length becomes
// ceil(len * 16000 / rate).
AudioClip resample_to_canonical(const AudioClip& clip);

// JSONL manifest. Relative clip paths are resolved against the manifest's
// directory. Blank lines are skipped.
std::vector<LabeledExample> load_manifest(const std::filesystem::path& path);

void write_manifest(const std::vector<LabeledExample>& examples,
                    const std::filesystem::path& path);

}  // namespace acfm
