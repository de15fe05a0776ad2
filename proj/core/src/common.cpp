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

#include <algorithm>
#include <cctype>
#include <string>

#include "acfm/error.hpp"
#include "acfm/labels.hpp"

namespace acfm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotWav: return "NotWav";
    case ErrorCode::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kEmptyClip: return "EmptyClip";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kWrongSampleRate: return "WrongSampleRate";
    case ErrorCode::kClipTooShort: return "ClipTooShort";
    case ErrorCode::kProfileLengthMismatch: return "ProfileLengthMismatch";
    case ErrorCode::kBadRange: return "BadRange";
    case ErrorCode::kBadChannelCount: return "BadChannelCount";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kClassTooSmall: return "ClassTooSmall";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kMixedChannels: return "MixedChannels";
    case ErrorCode::kMaskLengthMismatch: return "MaskLengthMismatch";
    case ErrorCode::kNoModel: return "NoModel";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmpty: return "Empty";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kBadConfig: return "BadConfig";
  }
  return "Unknown";
}

std::string_view label_name(ClassLabel label) {
  switch (label) {
    case ClassLabel::kAmbient: return "ambient";
    case ClassLabel::kExtruderNormal: return "extruder_normal";
    case ClassLabel::kExtruderFault: return "extruder_fault";
  }
  return "unknown";
}

ClassLabel parse_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (ClassLabel label : kAllLabels) {
    if (lower == label_name(label)) return label;
  }
  throw Error(ErrorCode::kUnknownLabel, "unknown class label '" + std::string(text) + "'");
}

}  // namespace acfm
