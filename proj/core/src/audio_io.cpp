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

#include "acfm/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

#include <nlohmann/json.hpp>

#include "acfm/error.hpp"

namespace acfm {
namespace {

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

bool tag_is(const std::vector<std::uint8_t>& b, std::size_t at, const char* tag) {
  return std::equal(tag, tag + 4, b.begin() + static_cast<std::ptrdiff_t>(at));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());

  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw Error(ErrorCode::kNotWav, path.string() + " is not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_is(bytes, pos, "fmt ")) {
      if (chunk_size < 16 || body + chunk_size > bytes.size()) {
        throw Error(ErrorCode::kTruncated, "fmt chunk is truncated in " + path.string());
      }
      std::uint16_t format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      sample_rate = read_u32(bytes, body + 4);
      const std::uint16_t bits = read_u16(bytes, body + 14);
      if (format == kFormatExtensible && chunk_size >= 26) format = read_u16(bytes, body + 24);
      if (format != kFormatPcm || bits != 16) {
        throw Error(ErrorCode::kUnsupportedEncoding,
                    "only PCM 16-bit is supported (format " + std::to_string(format) +
                        ", " + std::to_string(bits) + " bits)");
      }
      if (channels != 1 && channels != 2) {
        throw Error(ErrorCode::kUnsupportedEncoding,
                    std::to_string(channels) + " channels; expected 1 or 2");
      }
      if (sample_rate == 0) throw Error(ErrorCode::kUnsupportedEncoding, "sample rate is 0");
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw Error(ErrorCode::kNotWav, "data chunk precedes fmt chunk");
      const std::size_t available = bytes.size() - body;
      const std::size_t frame_bytes = 2u * channels;
      if (chunk_size > available || chunk_size % frame_bytes != 0) {
        throw Error(ErrorCode::kTruncated,
                    "data chunk claims " + std::to_string(chunk_size) + " bytes, " +
                        std::to_string(available) + " present");
      }
      AudioClip clip;
      clip.sample_rate_hz = static_cast<int>(sample_rate);
      const std::size_t frames = chunk_size / frame_bytes;
      clip.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        const std::size_t at = body + i * frame_bytes;
        const auto left = static_cast<std::int16_t>(read_u16(bytes, at));
        if (channels == 1) {
          clip.samples[i] = left / 32768.0;
        } else {
          const auto right = static_cast<std::int16_t>(read_u16(bytes, at + 2));
          clip.samples[i] = ((static_cast<double>(left) + right) / 2.0) / 32768.0;
        }
      }
      return clip;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  throw Error(have_fmt ? ErrorCode::kTruncated : ErrorCode::kNotWav,
              "no data chunk in " + path.string());
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double s : clip.samples) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32767.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

AudioClip resample_to_canonical(const AudioClip& clip) {
  if (clip.samples.empty()) throw Error(ErrorCode::kEmptyClip, "cannot resample an empty clip");
  if (clip.sample_rate_hz <= 0) throw Error(ErrorCode::kWrongSampleRate, "sample rate must be > 0");
  if (clip.sample_rate_hz == kCanonicalSampleRate) return clip;

  const auto in_rate = static_cast<std::uint64_t>(clip.sample_rate_hz);
  const std::uint64_t in_len = clip.samples.size();
  const std::uint64_t out_len = (in_len * kCanonicalSampleRate + in_rate - 1) / in_rate;
  AudioClip out;
  out.samples.resize(out_len);
  for (std::uint64_t n = 0; n < out_len; ++n) {
    // Exact rational source position n * in_rate / 16000.
    const std::uint64_t num = n * in_rate;
    const std::uint64_t i = num / kCanonicalSampleRate;
    const double frac = static_cast<double>(num % kCanonicalSampleRate) / kCanonicalSampleRate;
    if (i + 1 >= in_len) {
      out.samples[n] = clip.samples[in_len - 1];
    } else {
      out.samples[n] = clip.samples[i] + frac * (clip.samples[i + 1] - clip.samples[i]);
    }
  }
  return out;
}

AudioClip standardize(const AudioClip& clip, std::size_t target_len) {
  if (clip.samples.empty()) throw Error(ErrorCode::kEmptyClip, "cannot standardize an empty clip");
  AudioClip out = resample_to_canonical(clip);
  out.samples.resize(target_len, 0.0);
  return out;
}

std::vector<LabeledExample> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  const std::filesystem::path base = path.parent_path();

  std::vector<LabeledExample> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("path") || !obj["path"].is_string() ||
        !obj.contains("label") || !obj["label"].is_string()) {
      throw Error(ErrorCode::kParse, where + ": expected string keys 'path' and 'label'");
    }

    LabeledExample ex;
    ex.clip_path = obj["path"].get<std::string>();
    if (ex.clip_path.is_relative()) ex.clip_path = base / ex.clip_path;
    try {
      ex.label = parse_label(obj["label"].get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::kUnknownLabel, where + ": " + e.what());
    }
    if (obj.contains("split")) {
      std::string split = obj["split"].is_string() ? obj["split"].get<std::string>() : "";
      std::transform(split.begin(), split.end(), split.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (split == "train") {
        ex.split = Split::kTrain;
      } else if (split == "test") {
        ex.split = Split::kTest;
      } else {
        throw Error(ErrorCode::kParse, where + ": split must be \"train\" or \"test\"");
      }
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

void write_manifest(const std::vector<LabeledExample>& examples,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create manifest " + path.string());
  for (const LabeledExample& ex : examples) {
    nlohmann::ordered_json obj;
    obj["path"] = ex.clip_path.generic_string();
    obj["label"] = std::string(label_name(ex.label));
    if (ex.split) obj["split"] = *ex.split == Split::kTrain ? "train" : "test";
    out << obj.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace acfm
