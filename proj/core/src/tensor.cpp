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

#include "diffstride/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace diffstride {

std::string to_string(const Shape3& shape) {
  return "(" + std::to_string(shape.height) + ", " + std::to_string(shape.width) +
         ", " + std::to_string(shape.channels) + ")";
}

RealTensor::RealTensor(Shape3 shape, double fill)
    : shape_(shape), data_(shape.size(), fill) {}

RealTensor::RealTensor(Shape3 shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw std::invalid_argument("RealTensor: data size " + std::to_string(data_.size()) +
                                " does not match shape " + to_string(shape_));
  }
}

bool RealTensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double RealTensor::squared_norm() const {
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return acc;
}

void require_finite(const RealTensor& x, const char* what) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x.data()[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite value at flat index " +
                                  std::to_string(i));
    }
  }
}

}  // namespace diffstride
