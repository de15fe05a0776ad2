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

#include "acfm/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "acfm/error.hpp"
#include "acfm/random.hpp"

namespace acfm {
namespace {

void shuffle(std::vector<std::size_t>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

void check_feature_set(const FeatureSet& set, const char* what) {
  if (set.images.empty()) throw Error(ErrorCode::kEmptySet, std::string(what) + " set is empty");
  if (set.images.size() != set.labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::string(what) + " images and labels differ in count");
  }
  for (const SpectrogramImage& img : set.images) {
    if (img.channels != set.images.front().channels || img.channels != set.channels) {
      throw Error(ErrorCode::kMixedChannels, std::string(what) + " set mixes channel counts");
    }
  }
}

}  // namespace

SpectrogramImage features_from_filtered(const AudioClip& filtered, const FeatureOptions& options) {
  if (options.noise_profile) {
    return render(mel_spectrogram(spectral_subtract(filtered, *options.noise_profile, options.subtraction)),
                  options.colored);
  }
  return render(mel_spectrogram(filtered), options.colored);
}

SpectrogramImage extract_features(const AudioClip& clip, const FeatureOptions& options) {
  FilterCascade bandpass = design_bandpass();
  return features_from_filtered(apply_filter(bandpass, standardize(clip)), options);
}

FeatureSet build_features(const std::vector<LabeledExample>& examples, const FeatureOptions& options) {
  FeatureSet set;
  set.channels = options.colored ? 3 : 1;
  set.images.reserve(examples.size());
  set.labels.reserve(examples.size());
  for (const LabeledExample& ex : examples) {
    set.images.push_back(extract_features(read_wav(ex.clip_path), options));
    set.labels.push_back(label_index(ex.label));
  }
  return set;
}

SplitResult stratified_split(const std::vector<LabeledExample>& examples, double train_fraction,
                             std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw Error(ErrorCode::kBadConfig, "train_fraction must lie in [0, 1]");
  }
  std::array<std::vector<std::size_t>, kNumClasses> free_by_class;
  std::array<std::size_t, kNumClasses> class_count{};
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const std::size_t c = label_index(examples[i].label);
    ++class_count[c];
    if (!examples[i].split) free_by_class[c].push_back(i);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (class_count[c] == 1) {
      throw Error(ErrorCode::kClassTooSmall, "class " + std::string(label_name(label_from_index(c))) +
                                                 " has a single example; at least 2 are needed");
    }
  }

  std::vector<bool> to_train(examples.size(), false);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].split) to_train[i] = *examples[i].split == Split::kTrain;
  }
  SplitMix64 rng(seed);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t>& members = free_by_class[c];
    shuffle(members, rng);
    const auto n_train = static_cast<std::size_t>(
        std::lround(train_fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < n_train; ++k) to_train[members[k]] = true;
  }

  SplitResult out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    (to_train[i] ? out.train : out.test).push_back(examples[i]);
  }
  return out;
}

nlohmann::ordered_json TrainHistory::to_json() const {
  nlohmann::ordered_json j;
  j["epochs"] = nlohmann::ordered_json::array();
  for (const EpochStats& e : epochs) {
    j["epochs"].push_back({{"train_loss", e.train_loss}, {"val_loss", e.val_loss}, {"val_acc", e.val_acc}});
  }
  j["best_epoch"] = best_epoch;
  return j;
}

FreezeMask conv_freeze_mask(const Architecture& arch) {
  FreezeMask mask;
  for (const LayerSpec& l : arch.layers) {
    if (l.kind == LayerKind::kConv3x3) mask.push_back(true);
    if (l.kind == LayerKind::kDense) mask.push_back(false);
  }
  return mask;
}

Evaluation evaluate(const Model& model, const FeatureSet& data) {
  check_feature_set(data, "evaluation");
  Evaluation ev;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const ForwardResult<float> r = forward(model, std::span<const float>(data.images[i].pixels));
    const LossGrad lg = loss_and_grad(std::span<const float>(r.logits), data.labels[i]);
    ev.loss += lg.loss;
    const auto pred = static_cast<std::size_t>(std::max_element(r.logits.begin(), r.logits.end()) -
                                               r.logits.begin());
    ev.predictions.push_back(pred);
    if (pred == data.labels[i]) ++correct;
  }
  const auto n = static_cast<double>(data.images.size());
  ev.loss /= n;
  ev.accuracy = static_cast<double>(correct) / n;
  return ev;
}

TrainResult train(const FeatureSet& train_set, const FeatureSet& test_set, const TrainConfig& cfg) {
  check_feature_set(train_set, "training");
  const Model base = init_model(Architecture::canonical(train_set.channels), cfg.seed);
  return finetune(base, FreezeMask(base.arch.num_param_layers(), false), train_set, test_set, cfg);
}

TrainResult finetune(const Model& base, const FreezeMask& mask, const FeatureSet& train_set,
                     const FeatureSet& test_set, const TrainConfig& cfg) {
  if (cfg.epochs == 0 || cfg.batch_size == 0) {
    throw Error(ErrorCode::kBadConfig, "epochs and batch_size must be >= 1");
  }
  check_feature_set(train_set, "training");
  check_feature_set(test_set, "test");
  if (mask.size() != base.params.size()) {
    throw Error(ErrorCode::kMaskLengthMismatch, "freeze mask has " + std::to_string(mask.size()) +
                                                    " entries for " + std::to_string(base.params.size()) +
                                                    " parameterized layers");
  }
  if (train_set.channels != base.arch.input.channels || test_set.channels != base.arch.input.channels) {
    throw Error(ErrorCode::kMixedChannels, "data channel count does not match the model input");
  }

  TrainResult result{base, {}};
  Model& model = result.model;
  Model best = base;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  AdamState<float> adam = init_adam(model);
  const AdamParams hyper{cfg.lr};

  const std::size_t n = train_set.images.size();
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> batch;
  Gradients<float> grads = zero_like(model);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(derive_seed(cfg.seed, epoch));
    shuffle(order, rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + cfg.batch_size)));
      // Ascending example index, whatever the shuffle.
      std::sort(batch.begin(), batch.end());
      for (ParamLayer<float>& g : grads) {
        std::fill(g.weight.data.begin(), g.weight.data.end(), 0.0f);
        std::fill(g.bias.data.begin(), g.bias.data.end(), 0.0f);
      }
      for (std::size_t idx : batch) {
        const ForwardResult<float> r = forward(model, std::span<const float>(train_set.images[idx].pixels));
        const LossGrad lg = loss_and_grad(std::span<const float>(r.logits), train_set.labels[idx]);
        loss_sum += lg.loss;
        backward_accumulate(model, r.cache, lg.dlogits, grads);
      }
      const float scale = 1.0f / static_cast<float>(batch.size());
      for (std::size_t k = 0; k < grads.size(); ++k) {
        const float s = mask[k] ? 0.0f : scale;
        for (float& v : grads[k].weight.data) v *= s;
        for (float& v : grads[k].bias.data) v *= s;
      }
      adam_step(model, grads, adam, hyper);
    }

    const Evaluation val = evaluate(model, test_set);
    result.history.epochs.push_back({loss_sum / static_cast<double>(n), val.loss, val.accuracy});
    if (val.loss < best_val) {
      best_val = val.loss;
      best = model;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      break;
    }
  }
  model = std::move(best);
  return result;
}

}  // namespace acfm
