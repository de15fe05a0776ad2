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
#include <span>

#include <nlohmann/json.hpp>

#include "acfm/labels.hpp"

namespace acfm {

// Rows are the true class, columns the predicted class.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  std::size_t total() const;
};

struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // False when the denominator was zero and the 0 convention applied.
  bool precision_defined = true;
  bool recall_defined = true;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::array<PrfScores, kNumClasses> per_class;
  PrfScores macro;
  // extruder_fault positive, the other two classes negative.
  PrfScores binary_fault;
  ConfusionMatrix confusion;

  nlohmann::ordered_json to_json() const;
};

ConfusionMatrix confusion(std::span<const std::size_t> truths, std::span<const std::size_t> preds);

// 2PR / (P + R), or 0 when P + R = 0.
double f1_score(double precision, double recall);

PrfScores scores_from_counts(std::size_t true_pos, std::size_t false_pos, std::size_t false_neg);

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

}  // namespace acfm
