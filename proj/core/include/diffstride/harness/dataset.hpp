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
#include <cstdint>
#include <vector>

#include "diffstride/tensor.hpp"

namespace diffstride::harness {

struct BandlimitedSpec {
  std::uint64_t seed = 1;
  std::size_t n = 100;
  std::size_t size = 16;
  std::size_t classes = 2;
  std::vector<std::vector<int>> bands{{1, 2}, {5, 6}};
  std::size_t components = 3;
  double noise = 0.1;

  /// Rejects band partitions that overlap, are empty, or reach the Nyquist
  /// radius size/2.
  void validate() const;
};

struct Dataset {
  std::vector<RealTensor> images;  // (size, size, 1)
  std::vector<std::size_t> labels;
};

/// Chebyshev radius max(|f_v|, |f_h|) of an integer 2D frequency.
int chebyshev_radius(int fv, int fh);

/// Sample i has label i % classes and is a sum of `components`
/// unit-amplitude cosines with uniformly random phase, each at an integer
/// frequency whose Chebyshev radius lies in the label's band, plus i.i.d.
/// Gaussian noise. Deterministic in the spec.
Dataset gen_bandlimited_dataset(const BandlimitedSpec& spec);

}  // namespace diffstride::harness
