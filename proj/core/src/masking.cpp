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

#include "diffstride/masking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace diffstride::masking {

namespace {

double clip01(double v) { return std::min(std::max(v, 0.0), 1.0); }

double vertical_argument(const MaskSpec& spec, std::size_t m) {
  const double R = spec.smoothness;
  const double H = static_cast<double>(spec.height);
  const double dist = std::abs(static_cast<double>(spec.height / 2) - static_cast<double>(m));
  return (R + H / (2.0 * spec.stride_h) - dist) / R;
}

double horizontal_argument(const MaskSpec& spec, std::size_t n) {
  const double R = spec.smoothness;
  const double W = static_cast<double>(spec.width);
  return (R + W / (2.0 * spec.stride_w) + 1.0 - static_cast<double>(n)) / R;
}

IndexRange positive_range(const std::vector<double>& v) {
  IndexRange r{v.size(), v.size()};
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) {
      if (r.begin == v.size()) r.begin = i;
      r.end = i + 1;
    }
  }
  if (r.begin == v.size()) r = IndexRange{0, 0};
  return r;
}

std::size_t clipped_extent(std::size_t size, double stride, double smoothness) {
  const double raw = std::floor(static_cast<double>(size) / stride + 2.0 * smoothness);
  if (!(raw >= 1.0)) {
    throw std::invalid_argument("masking: degenerate target extent");
  }
  return std::min(size, static_cast<std::size_t>(raw));
}

}  // namespace

void MaskSpec::validate() const {
  if (height == 0 || width == 0) {
    throw std::invalid_argument("MaskSpec: height and width must be >= 1");
  }
  if (!(smoothness > 0.0) || !std::isfinite(smoothness)) {
    throw std::invalid_argument("MaskSpec: smoothness R must be positive, got " +
                                std::to_string(smoothness));
  }
  // A 1-pixel axis admits only the identity stride.
  const auto in_box = [](double s, std::size_t size) {
    if (!std::isfinite(s) || s < 1.0) return false;
    return size == 1 ? s == 1.0 : s < static_cast<double>(size);
  };
  if (!in_box(stride_h, height)) {
    throw std::invalid_argument("MaskSpec: stride_h " + std::to_string(stride_h) +
                                " outside [1, " + std::to_string(height) + ")");
  }
  if (!in_box(stride_w, width)) {
    throw std::invalid_argument("MaskSpec: stride_w " + std::to_string(stride_w) +
                                " outside [1, " + std::to_string(width) + ")");
  }
}

std::vector<double> mask_h(const MaskSpec& spec) {
  spec.validate();
  std::vector<double> out(spec.height);
  for (std::size_t m = 0; m < spec.height; ++m) out[m] = clip01(vertical_argument(spec, m));
  return out;
}

std::vector<double> mask_w(const MaskSpec& spec) {
  spec.validate();
  std::vector<double> out(spec.width / 2 + 1);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = clip01(horizontal_argument(spec, n));
  return out;
}

MaskDerivatives dmask_dstride(const MaskSpec& spec) {
  spec.validate();
  const double R = spec.smoothness;
  const double dh = -static_cast<double>(spec.height) / (2.0 * R * spec.stride_h * spec.stride_h);
  const double dw = -static_cast<double>(spec.width) / (2.0 * R * spec.stride_w * spec.stride_w);

  MaskDerivatives d;
  d.d_vertical.resize(spec.height);
  for (std::size_t m = 0; m < spec.height; ++m) {
    const double a = vertical_argument(spec, m);
    d.d_vertical[m] = (a > 0.0 && a < 1.0) ? dh : 0.0;
  }
  d.d_horizontal.resize(spec.width / 2 + 1);
  for (std::size_t n = 0; n < d.d_horizontal.size(); ++n) {
    const double a = horizontal_argument(spec, n);
    d.d_horizontal[n] = (a > 0.0 && a < 1.0) ? dw : 0.0;
  }
  return d;
}

TargetShape target_shape(const MaskSpec& spec) {
  spec.validate();
  return TargetShape{clipped_extent(spec.height, spec.stride_h, spec.smoothness),
                     clipped_extent(spec.width, spec.stride_w, spec.smoothness)};
}

IndexRange centered_rows(std::size_t height, std::size_t target) {
  if (target == 0 || target > height) {
    throw std::invalid_argument("centered_rows: target " + std::to_string(target) +
                                " not in [1, " + std::to_string(height) + "]");
  }
  const std::size_t begin = height / 2 - target / 2;
  return IndexRange{begin, begin + target};
}

IndexRange leading_cols(std::size_t target) {
  if (target == 0) throw std::invalid_argument("leading_cols: target must be >= 1");
  return IndexRange{0, target / 2 + 1};
}

CropMask build_crop_mask(const MaskSpec& spec) {
  CropMask mask;
  mask.vertical = mask_h(spec);
  mask.horizontal = mask_w(spec);
  mask.rows = mask.vertical.size();
  mask.cols = mask.horizontal.size();
  mask.values.resize(mask.rows * mask.cols);
  for (std::size_t m = 0; m < mask.rows; ++m) {
    for (std::size_t n = 0; n < mask.cols; ++n) {
      mask.values[m * mask.cols + n] = mask.vertical[m] * mask.horizontal[n];
    }
  }
  mask.row_support = positive_range(mask.vertical);
  mask.col_support = positive_range(mask.horizontal);
  mask.target = target_shape(spec);
  mask.crop_rows = centered_rows(spec.height, mask.target.height);
  mask.crop_cols = leading_cols(mask.target.width);
  return mask;
}

}  // namespace diffstride::masking
