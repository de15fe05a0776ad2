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

#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "acfm/cnn.hpp"
#include "acfm/dsp_frontend.hpp"
#include "acfm/spectrogram.hpp"
#include "acfm/stream_monitor.hpp"
#include "acfm/synth.hpp"

namespace {

const acfm::AudioClip& clip() {
  static const acfm::AudioClip c = acfm::synth_clip(acfm::ClassLabel::kExtruderFault, 1);
  return c;
}

void BM_Bandpass(benchmark::State& state) {
  for (auto _ : state) {
    acfm::FilterCascade bp = acfm::design_bandpass();
    benchmark::DoNotOptimize(acfm::apply_filter(bp, clip()));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(clip().size()));
}
BENCHMARK(BM_Bandpass);

void BM_Stft(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(acfm::stft(clip()));
}
BENCHMARK(BM_Stft);

void BM_MelSpectrogram(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(acfm::mel_spectrogram(clip()));
}
BENCHMARK(BM_MelSpectrogram);

void BM_Forward(benchmark::State& state) {
  const acfm::Model model = acfm::init_model(acfm::Architecture::canonical(3), 1);
  const acfm::SpectrogramImage img = acfm::render(acfm::mel_spectrogram(clip()), true);
  for (auto _ : state) benchmark::DoNotOptimize(acfm::predict(model, img));
}
BENCHMARK(BM_Forward);

void BM_ForwardBackward(benchmark::State& state) {
  const acfm::Model model = acfm::init_model(acfm::Architecture::canonical(3), 1);
  const acfm::SpectrogramImage img = acfm::render(acfm::mel_spectrogram(clip()), true);
  for (auto _ : state) {
    const auto r = acfm::forward(model, std::span<const float>(img.pixels));
    const auto lg = acfm::loss_and_grad(std::span<const float>(r.logits), 2);
    benchmark::DoNotOptimize(acfm::backward(model, r.cache, std::span<const double>(lg.dlogits)));
  }
}
BENCHMARK(BM_ForwardBackward);

// One monitor stride: 8192 new samples and one verdict.
void BM_MonitorStride(benchmark::State& state) {
  auto model = std::make_shared<const acfm::Model>(acfm::init_model(acfm::Architecture::canonical(3), 1));
  acfm::StreamMonitor monitor(model);
  monitor.push_samples(clip().samples);
  const std::span<const double> stride = std::span<const double>(clip().samples).first(8192);
  for (auto _ : state) benchmark::DoNotOptimize(monitor.push_samples(stride));
}
BENCHMARK(BM_MonitorStride)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
