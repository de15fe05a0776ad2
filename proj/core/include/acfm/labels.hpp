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
#include <string_view>

namespace acfm {

// Ambient room noise, extruder feeding material, extruder running dry.
enum class ClassLabel : int { kAmbient = 0, kExtruderNormal = 1, kExtruderFault = 2 };

inline constexpr std::size_t kNumClasses = 3;

inline constexpr std::array<ClassLabel, kNumClasses> kAllLabels = {
    ClassLabel::kAmbient, ClassLabel::kExtruderNormal, ClassLabel::kExtruderFault};

inline constexpr std::size_t label_index(ClassLabel label) {
  return static_cast<std::size_t>(label);
}

inline constexpr ClassLabel label_from_index(std::size_t index) {
  return kAllLabels.at(index);
}

// Wire names used by manifests, reports and verdict streams.
std::string_view label_name(ClassLabel label);

// Case-insensitive; throws Error(kUnknownLabel) for anything else.
ClassLabel parse_label(std::string_view text);

}  // namespace acfm
