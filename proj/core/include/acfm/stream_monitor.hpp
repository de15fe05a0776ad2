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
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "acfm/audio_io.hpp"
#include "acfm/cnn.hpp"
#include "acfm/dsp_frontend.hpp"

namespace acfm {

struct MonitorConfig {
  std::size_t window = kCanonicalClipLength;
  // 0.512 s at 16 kHz.
  std::size_t stride = 8192;
  double ema_alpha = 0.6;
  double alarm_on = 0.8;
  double alarm_off = 0.5;
  std::size_t consecutive_k = 3;

  // Throws kBadConfig.
  void validate() const;
};

enum class AlarmState { kNormal, kAlarm };

struct StreamVerdict {
  // Seconds from stream start to the last sample of the window.
  double t_end = 0.0;
  ClassProbabilities probs;
  double smoothed_fault = 0.0;
  AlarmState state = AlarmState::kNormal;

  nlohmann::ordered_json to_json() const;
  bool operator==(const StreamVerdict& other) const;
};

// EMA smoothing of the fault probability plus k-consecutive arming and
// hysteresis release.
class AlarmLogic {
 public:
  explicit AlarmLogic(const MonitorConfig& cfg);

  struct Step {
    double smoothed = 0.0;
    AlarmState state = AlarmState::kNormal;
  };

  Step update(double p_fault);

 private:
  double alpha_;
  double on_;
  double off_;
  std::size_t k_;
  bool primed_ = false;
  double smoothed_ = 0.0;
  std::size_t run_ = 0;
  AlarmState state_ = AlarmState::kNormal;
};

// Sliding-window classifier over a 16 kHz sample stream. Samples are
// bandpassed on arrival by one persistent cascade; the first verdict fires
// once `window` samples have arrived and then every `stride` samples.
// Verdicts depend only on the sample sequence, never on how it was chunked.
// Single owner; movable between threads.
class StreamMonitor {
 public:
  // Throws kNoModel when model is null.
  explicit StreamMonitor(std::shared_ptr<const Model> model, MonitorConfig cfg = {});

  std::vector<StreamVerdict> push_samples(std::span<const double> samples);

  std::uint64_t samples_consumed() const { return consumed_; }
  const MonitorConfig& config() const { return cfg_; }

 private:
  StreamVerdict classify_window();

  std::shared_ptr<const Model> model_;
  MonitorConfig cfg_;
  FilterCascade bandpass_;
  AlarmLogic alarm_;
  std::vector<double> ring_;
  std::size_t write_pos_ = 0;
  std::uint64_t consumed_ = 0;
  std::uint64_t next_emit_ = 0;
};

// Streams a WAV file through the monitor in `chunk`-sample pieces and writes
// one JSON verdict per line. Returns the verdicts as well.
std::vector<StreamVerdict> run_file(StreamMonitor& monitor, const std::filesystem::path& wav,
                                    std::ostream& out, std::size_t chunk = 4096);

}  // namespace acfm
