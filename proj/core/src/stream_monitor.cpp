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

#include "acfm/stream_monitor.hpp"

#include <algorithm>
#include <string>

#include "acfm/error.hpp"
#include "acfm/trainer.hpp"

namespace acfm {

void MonitorConfig::validate() const {
  if (window != kCanonicalClipLength) {
    throw Error(ErrorCode::kBadConfig, "monitor window must be " + std::to_string(kCanonicalClipLength));
  }
  if (stride == 0) throw Error(ErrorCode::kBadConfig, "stride must be >= 1");
  if (!(ema_alpha > 0.0 && ema_alpha <= 1.0)) throw Error(ErrorCode::kBadConfig, "ema_alpha must lie in (0, 1]");
  if (!(alarm_off < alarm_on)) throw Error(ErrorCode::kBadConfig, "alarm_off must be below alarm_on");
  if (consecutive_k == 0) throw Error(ErrorCode::kBadConfig, "consecutive_k must be >= 1");
}

nlohmann::ordered_json StreamVerdict::to_json() const {
  nlohmann::ordered_json probs_json;
  for (ClassLabel label : kAllLabels) {
    probs_json[std::string(label_name(label))] = probs.p[label_index(label)];
  }
  nlohmann::ordered_json j;
  j["t_end"] = t_end;
  j["probs"] = probs_json;
  j["smoothed_fault"] = smoothed_fault;
  j["state"] = state == AlarmState::kAlarm ? "alarm" : "normal";
  return j;
}

bool StreamVerdict::operator==(const StreamVerdict& other) const {
  return t_end == other.t_end && probs.p == other.probs.p && smoothed_fault == other.smoothed_fault &&
         state == other.state;
}

AlarmLogic::AlarmLogic(const MonitorConfig& cfg)
    : alpha_(cfg.ema_alpha), on_(cfg.alarm_on), off_(cfg.alarm_off), k_(cfg.consecutive_k) {}

AlarmLogic::Step AlarmLogic::update(double p_fault) {
  smoothed_ = primed_ ? alpha_ * p_fault + (1.0 - alpha_) * smoothed_ : p_fault;
  primed_ = true;
  run_ = smoothed_ >= on_ ? run_ + 1 : 0;
  if (state_ == AlarmState::kNormal && run_ >= k_) {
    state_ = AlarmState::kAlarm;
  } else if (state_ == AlarmState::kAlarm && smoothed_ < off_) {
    state_ = AlarmState::kNormal;
  }
  return {smoothed_, state_};
}

StreamMonitor::StreamMonitor(std::shared_ptr<const Model> model, MonitorConfig cfg)
    : model_(std::move(model)), cfg_(cfg), bandpass_(design_bandpass()), alarm_(cfg_) {
  if (!model_) throw Error(ErrorCode::kNoModel, "stream monitor needs a model");
  cfg_.validate();
  ring_.assign(cfg_.window, 0.0);
  next_emit_ = cfg_.window;
}

std::vector<StreamVerdict> StreamMonitor::push_samples(std::span<const double> samples) {
  std::vector<StreamVerdict> verdicts;
  for (double s : samples) {
    ring_[write_pos_] = bandpass_.process(s);
    write_pos_ = (write_pos_ + 1) % ring_.size();
    ++consumed_;
    if (consumed_ == next_emit_) {
      verdicts.push_back(classify_window());
      next_emit_ += cfg_.stride;
    }
  }
  return verdicts;
}

StreamVerdict StreamMonitor::classify_window() {
  // write_pos_ now points at the oldest sample.
  AudioClip window;
  window.sample_rate_hz = kCanonicalSampleRate;
  window.samples.reserve(ring_.size());
  window.samples.insert(window.samples.end(), ring_.begin() + static_cast<std::ptrdiff_t>(write_pos_),
                        ring_.end());
  window.samples.insert(window.samples.end(), ring_.begin(),
                        ring_.begin() + static_cast<std::ptrdiff_t>(write_pos_));

  FeatureOptions options;
  options.colored = model_->arch.input.channels == 3;
  StreamVerdict v;
  v.t_end = static_cast<double>(consumed_) / kCanonicalSampleRate;
  v.probs = predict(*model_, features_from_filtered(window, options));
  const AlarmLogic::Step step = alarm_.update(v.probs.fault());
  v.smoothed_fault = step.smoothed;
  v.state = step.state;
  return v;
}

std::vector<StreamVerdict> run_file(StreamMonitor& monitor, const std::filesystem::path& wav,
                                    std::ostream& out, std::size_t chunk) {
  if (chunk == 0) throw Error(ErrorCode::kBadConfig, "chunk size must be >= 1");
  const AudioClip clip = resample_to_canonical(read_wav(wav));
  std::vector<StreamVerdict> all;
  const std::span<const double> samples(clip.samples);
  for (std::size_t start = 0; start < samples.size(); start += chunk) {
    const std::size_t len = std::min(chunk, samples.size() - start);
    for (StreamVerdict& v : monitor.push_samples(samples.subspan(start, len))) {
      out << v.to_json().dump() << '\n';
      all.push_back(std::move(v));
    }
  }
  out.flush();
  return all;
}

}  // namespace acfm
