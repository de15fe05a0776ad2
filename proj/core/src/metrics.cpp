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

#include "acfm/metrics.hpp"

#include <string>

#include "acfm/error.hpp"

namespace acfm {

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (const auto& row : counts) {
    for (std::size_t v : row) sum += v;
  }
  return sum;
}

ConfusionMatrix confusion(std::span<const std::size_t> truths, std::span<const std::size_t> preds) {
  if (truths.size() != preds.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(truths.size()) + " truths vs " +
                                                std::to_string(preds.size()) + " predictions");
  }
  if (truths.empty()) throw Error(ErrorCode::kEmpty, "no examples to score");
  ConfusionMatrix cm;
  for (std::size_t k = 0; k < truths.size(); ++k) {
    if (truths[k] >= kNumClasses || preds[k] >= kNumClasses) {
      throw Error(ErrorCode::kUnknownLabel, "class index out of range at position " + std::to_string(k));
    }
    ++cm.counts[truths[k]][preds[k]];
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

PrfScores scores_from_counts(std::size_t true_pos, std::size_t false_pos, std::size_t false_neg) {
  PrfScores s;
  const std::size_t predicted = true_pos + false_pos;
  const std::size_t actual = true_pos + false_neg;
  s.precision_defined = predicted > 0;
  s.recall_defined = actual > 0;
  s.precision = s.precision_defined ? static_cast<double>(true_pos) / static_cast<double>(predicted) : 0.0;
  s.recall = s.recall_defined ? static_cast<double>(true_pos) / static_cast<double>(actual) : 0.0;
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");

  MetricsReport r;
  r.confusion = cm;
  std::size_t trace = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    trace += cm.counts[i][i];
    std::size_t row = 0;
    std::size_t col = 0;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      row += cm.counts[i][j];
      col += cm.counts[j][i];
    }
    r.per_class[i] = scores_from_counts(cm.counts[i][i], col - cm.counts[i][i], row - cm.counts[i][i]);
  }
  r.accuracy = static_cast<double>(trace) / static_cast<double>(total);

  for (const PrfScores& s : r.per_class) {
    r.macro.precision += s.precision / kNumClasses;
    r.macro.recall += s.recall / kNumClasses;
    r.macro.f1 += s.f1 / kNumClasses;
    r.macro.precision_defined = r.macro.precision_defined && s.precision_defined;
    r.macro.recall_defined = r.macro.recall_defined && s.recall_defined;
  }

  const std::size_t fault = label_index(ClassLabel::kExtruderFault);
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t j = 0; j < kNumClasses; ++j) {
    if (j == fault) continue;
    fp += cm.counts[j][fault];
    fn += cm.counts[fault][j];
  }
  r.binary_fault = scores_from_counts(cm.counts[fault][fault], fp, fn);
  return r;
}

nlohmann::ordered_json MetricsReport::to_json() const {
  auto scores = [](const PrfScores& s) {
    return nlohmann::ordered_json{{"precision", s.precision},
                          {"recall", s.recall},
                          {"f1", s.f1},
                          {"precision_defined", s.precision_defined},
                          {"recall_defined", s.recall_defined}};
  };
  nlohmann::ordered_json j;
  j["accuracy"] = accuracy;
  j["per_class"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    j["per_class"][std::string(label_name(label_from_index(i)))] = scores(per_class[i]);
  }
  j["macro"] = scores(macro);
  j["binary_fault"] = scores(binary_fault);
  j["confusion"] = nlohmann::ordered_json::array();
  for (const auto& row : confusion.counts) j["confusion"].push_back(row);
  return j;
}

}  // namespace acfm
