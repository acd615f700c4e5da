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

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace diffstride {

using Complex = std::complex<double>;

/// Spatial extent of a rank-3 activation (rows, cols, channels).
struct Shape3 {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return height * width * channels; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

std::string to_string(const Shape3& shape);

/// Real rank-3 array stored row-major as (h, w, c) with channels innermost.
class RealTensor {
 public:
  RealTensor() = default;
  explicit RealTensor(Shape3 shape, double fill = 0.0);
  RealTensor(Shape3 shape, std::vector<double> data);

  const Shape3& shape() const { return shape_; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t h, std::size_t w, std::size_t c) {
    return data_[(h * shape_.width + w) * shape_.channels + c];
  }
  double operator()(std::size_t h, std::size_t w, std::size_t c) const {
    return data_[(h * shape_.width + w) * shape_.channels + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }

  bool all_finite() const;
  double squared_norm() const;

 private:
  Shape3 shape_;
  std::vector<double> data_;
};

/// Throws std::invalid_argument naming `what` when any entry is NaN or Inf.
void require_finite(const RealTensor& x, const char* what);

}  // namespace diffstride
