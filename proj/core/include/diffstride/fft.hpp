// Copyright 2026 The DiffStride Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "diffstride/tensor.hpp"

namespace diffstride {

/// Precomputed 1D complex DFT of a fixed length. Power-of-two lengths use an
/// iterative radix-2 kernel; every other length goes through Bluestein's
/// chirp-z reduction onto a power-of-two convolution.
///
/// Transforms are unnormalized: forward uses exp(-2*pi*i*k*n/N), backward
/// uses exp(+2*pi*i*k*n/N).
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  void forward(std::span<Complex> data) const { transform(data, false); }
  void backward(std::span<Complex> data) const { transform(data, true); }

  /// Shared plan for length `n`, cached per thread.
  static const FftPlan& get(std::size_t n);

 private:
  void transform(std::span<Complex> data, bool inverse) const;
  void radix2(std::span<Complex> data, bool inverse) const;

  std::size_t n_;
  bool pow2_;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddles_;  // exp(-2*pi*i*k/n), k < n/2

  // Bluestein state, only populated for non power-of-two sizes.
  std::vector<Complex> chirp_;          // exp(-i*pi*k^2/n)
  std::vector<Complex> chirp_filter_;   // FFT of the conjugate chirp, padded
  std::unique_ptr<FftPlan> inner_;
};

bool is_power_of_two(std::size_t n);

}  // namespace diffstride
