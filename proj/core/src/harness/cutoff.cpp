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

#include "diffstride/harness/cutoff.hpp"

#include <cmath>
#include <stdexcept>

namespace diffstride::harness {

double stride_to_cutoff(double stride, double frame_rate_hz) {
  if (!std::isfinite(stride) || stride < 1.0) {
    throw std::invalid_argument("stride_to_cutoff: stride must be >= 1");
  }
  if (!std::isfinite(frame_rate_hz) || frame_rate_hz <= 0.0) {
    throw std::invalid_argument("stride_to_cutoff: frame rate must be > 0");
  }
  return 0.5 * frame_rate_hz / stride;
}

}  // namespace diffstride::harness
