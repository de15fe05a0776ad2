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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "acfm/labels.hpp"
#include "acfm/spectrogram.hpp"

namespace acfm {

enum class LayerKind { kConv3x3, kRelu, kMaxPool2, kFlatten, kDense };

struct LayerSpec {
  LayerKind kind;
  // Output channels for kConv3x3, output units for kDense; unused otherwise.
  std::size_t units = 0;
  // Parameter name prefix, e.g. "conv1"; empty for parameter-free layers.
  std::string name;
};

// Height x width x channels, row-major HWC.
struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return height * width * channels; }
  bool operator==(const Shape&) const = default;
};

struct Architecture {
  Shape input;
  std::vector<LayerSpec> layers;

  // 64x64xC -> 3 x (conv3x3, relu, maxpool) with 8/16/32 filters -> flatten
  // (2048) -> dense 64 -> relu -> dense 3. Throws kBadChannelCount unless
  // C is 1 or 3.
  static Architecture canonical(std::size_t channels);
  // 8x8x1 -> conv3x3x2 -> relu -> maxpool -> flatten -> dense 3.
  static Architecture gradcheck();

  // Output shape of every layer; throws kShapeMismatch on an impossible
  // stack (odd pooling input, conv after flatten, ...).
  std::vector<Shape> output_shapes() const;
  std::size_t num_outputs() const { return output_shapes().back().size(); }
  std::size_t num_param_layers() const;
  bool operator==(const Architecture& other) const;
};

template <typename T>
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<T> data;
};

// Weights and bias of one conv or dense layer. Conv weights are
// (kh, kw, in, out); dense weights are (out, in).
template <typename T>
struct ParamLayer {
  std::size_t layer_index = 0;
  std::string name;
  Tensor<T> weight;
  Tensor<T> bias;
};

template <typename T>
struct Network {
  Architecture arch;
  std::vector<ParamLayer<T>> params;
  std::uint64_t seed = 0;
};

// Training runs in 32-bit; gradient checking uses Network<double>.
using Model = Network<float>;

template <typename T>
using Gradients = std::vector<ParamLayer<T>>;

// Activations kept for backward: the input to every layer, plus max-pool
// argmax indices.
template <typename T>
struct ForwardCache {
  std::vector<std::vector<T>> inputs;
  std::vector<std::vector<std::uint32_t>> argmax;
};

template <typename T>
struct ForwardResult {
  std::vector<T> logits;
  ForwardCache<T> cache;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> dlogits;
};

struct ClassProbabilities {
  std::array<double, kNumClasses> p{};

  ClassLabel argmax() const;
  double fault() const { return p[label_index(ClassLabel::kExtruderFault)]; }
};

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  std::uint64_t step = 0;
  Gradients<T> m;
  Gradients<T> v;
};

// He-normal weights (std sqrt(2 / fan_in)) from SplitMix64(seed), zero
// biases.
template <typename T>
Network<T> init_network(const Architecture& arch, std::uint64_t seed);

inline Model init_model(const Architecture& arch, std::uint64_t seed) {
  return init_network<float>(arch, seed);
}

// Parameters shaped for arch, all zero.
template <typename T>
Gradients<T> zero_like(const Network<T>& net);

template <typename T>
ForwardResult<T> forward(const Network<T>& net, std::span<const T> input);

// Softmax cross-entropy with max subtraction.
LossGrad loss_and_grad(std::span<const double> logits, std::size_t label);

template <typename T>
LossGrad loss_and_grad(std::span<const T> logits, std::size_t label) {
  std::vector<double> wide(logits.begin(), logits.end());
  return loss_and_grad(std::span<const double>(wide), label);
}

// Adds this example's gradients into `grads`.
template <typename T>
void backward_accumulate(const Network<T>& net, const ForwardCache<T>& cache,
                         std::span<const double> dlogits, Gradients<T>& grads);

template <typename T>
Gradients<T> backward(const Network<T>& net, const ForwardCache<T>& cache,
                      std::span<const double> dlogits) {
  Gradients<T> grads = zero_like(net);
  backward_accumulate(net, cache, dlogits, grads);
  return grads;
}

template <typename T>
AdamState<T> init_adam(const Network<T>& net);

template <typename T>
void adam_step(Network<T>& net, const Gradients<T>& grads, AdamState<T>& state,
               const AdamParams& hyper = {});

std::array<double, kNumClasses> softmax(std::span<const double> logits);

ClassProbabilities predict(const Model& model, std::span<const float> pixels);
ClassProbabilities predict(const Model& model, const SpectrogramImage& image);

// Binary "ACFM" v1 format, little-endian. Only canonical architectures are
// stored; the channel count selects which.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

struct GradCheckOptions {
  double epsilon = 1e-3;
  // Degenerate probe: zero input image and label 0.
  bool zero_input = false;
};

// Central finite differences against backward on the reduced architecture,
// in double precision. Returns max |a - n| / max(1e-8, |a| + |n|).
double grad_check(std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace acfm
