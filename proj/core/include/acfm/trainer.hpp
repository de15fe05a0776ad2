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
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "acfm/audio_io.hpp"
#include "acfm/cnn.hpp"
#include "acfm/dsp_frontend.hpp"
#include "acfm/spectrogram.hpp"

namespace acfm {

// Clip -> CNN input. Bandpass (fresh cascade), optional spectral
// subtraction, log-mel, then grayscale or colored rendering. The stream
// monitor runs the same steps on a pre-filtered window.
struct FeatureOptions {
  bool colored = true;
  std::optional<NoiseProfile> noise_profile;
  SubtractionParams subtraction;
};

SpectrogramImage extract_features(const AudioClip& clip, const FeatureOptions& options);

// Render step shared with the stream monitor: the clip is already
// bandpassed.
SpectrogramImage features_from_filtered(const AudioClip& filtered, const FeatureOptions& options);

struct FeatureSet {
  std::vector<SpectrogramImage> images;
  std::vector<std::size_t> labels;
  std::size_t channels = 0;
};

// Reads, standardizes and featurizes every example in order.
FeatureSet build_features(const std::vector<LabeledExample>& examples, const FeatureOptions& options);

struct SplitResult {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
};

// Examples with an explicit split keep it. The rest are shuffled per class
// with SplitMix64(seed) and round(train_fraction * n_class) go to train.
// Both outputs preserve input order.
SplitResult stratified_split(const std::vector<LabeledExample>& examples, double train_fraction = 0.8,
                             std::uint64_t seed = 42);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  std::uint64_t seed = 7;
  bool colored = true;
  std::size_t early_stop_patience = 5;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;

  nlohmann::ordered_json to_json() const;
};

struct TrainResult {
  Model model;
  TrainHistory history;
};

// One flag per parameterized layer; true = frozen.
using FreezeMask = std::vector<bool>;

// Conv layers frozen, dense layers trainable.
FreezeMask conv_freeze_mask(const Architecture& arch);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<std::size_t> predictions;
};

Evaluation evaluate(const Model& model, const FeatureSet& data);

// Fresh init from cfg.seed, then finetune with nothing frozen.
TrainResult train(const FeatureSet& train_set, const FeatureSet& test_set, const TrainConfig& cfg);

// Minibatch Adam from `base`, zeroing gradients of frozen layers before
// every step. Per-epoch shuffles come from derive_seed(cfg.seed, epoch);
// early stopping restores the parameters with the lowest validation loss.
TrainResult finetune(const Model& base, const FreezeMask& mask, const FeatureSet& train_set,
                     const FeatureSet& test_set, const TrainConfig& cfg);

}  // namespace acfm
