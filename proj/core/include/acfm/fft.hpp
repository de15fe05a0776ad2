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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace acfm {

// In-place iterative radix-2 FFT with precomputed twiddles. The size must
// be a power of two. Immutable after construction, so one plan can serve
// many threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t size);

  std::size_t size() const { return size_; }

  void forward(std::span<std::complex<double>> data) const;
  // Unnormalized inverse; divide by size() to invert forward().
  void inverse(std::span<std::complex<double>> data) const;

 private:
  void transform(std::span<std::complex<double>> data, bool inverse) const;

  std::size_t size_;
  std::vector<std::complex<double>> twiddles_;
  std::vector<std::size_t> bit_reverse_;
};

}  // namespace acfm
