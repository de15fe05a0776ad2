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

#include "acfm/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "acfm/error.hpp"

namespace acfm {

FftPlan::FftPlan(std::size_t size) : size_(size) {
  if (size < 2 || (size & (size - 1)) != 0) {
    throw Error(ErrorCode::kBadConfig, "FFT size must be a power of two >= 2");
  }
  twiddles_.resize(size / 2);
  for (std::size_t k = 0; k < size / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / size;
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < size) ++bits;
  bit_reverse_.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    bit_reverse_[i] = r;
  }
}

void FftPlan::forward(std::span<std::complex<double>> data) const { transform(data, false); }

void FftPlan::inverse(std::span<std::complex<double>> data) const { transform(data, true); }

void FftPlan::transform(std::span<std::complex<double>> data, bool inverse) const {
  if (data.size() != size_) throw Error(ErrorCode::kShapeMismatch, "FFT input has wrong length");
  for (std::size_t i = 0; i < size_; ++i) {
    if (i < bit_reverse_[i]) std::swap(data[i], data[bit_reverse_[i]]);
  }
  for (std::size_t len = 2; len <= size_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = size_ / len;
    for (std::size_t start = 0; start < size_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> w = twiddles_[k * stride];
        const double wr = w.real();
        const double wi = inverse ? -w.imag() : w.imag();
        const std::complex<double> a = data[start + k];
        const std::complex<double> x = data[start + k + half];
        // Plain product; std::complex operator* adds NaN-recovery branches.
        const std::complex<double> b{x.real() * wr - x.imag() * wi,
                                     x.real() * wi + x.imag() * wr};
        data[start + k] = a + b;
        data[start + k + half] = a - b;
      }
    }
  }
}

}  // namespace acfm
