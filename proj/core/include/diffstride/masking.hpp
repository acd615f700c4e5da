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
#include <vector>

namespace diffstride::masking {

inline constexpr double kDefaultSmoothness = 4.0;

/// Inputs of the learnable low-pass window: input size, taper width R and
/// real-valued strides constrained to [1, H) x [1, W).
struct MaskSpec {
  std::size_t height = 0;
  std::size_t width = 0;
  double smoothness = kDefaultSmoothness;
  double stride_h = 1.0;
  double stride_w = 1.0;

  /// Throws std::invalid_argument when the spec leaves the feasible box.
  void validate() const;
};

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct TargetShape {
  std::size_t height = 0;
  std::size_t width = 0;
  friend bool operator==(const TargetShape&, const TargetShape&) = default;
};

/// Rank-1 2D window over a DC-centered half-spectrum together with the
/// crop geometry it implies.
struct CropMask {
  std::size_t rows = 0;  // H
  std::size_t cols = 0;  // floor(W / 2) + 1
  std::vector<double> vertical;    // length H
  std::vector<double> horizontal;  // length floor(W / 2) + 1
  std::vector<double> values;      // rows x cols, row-major
  IndexRange row_support;          // rows with strictly positive weight
  IndexRange col_support;          // cols with strictly positive weight
  TargetShape target;              // spatial (H', W') after crop and inverse
  IndexRange crop_rows;            // H' rows centered on the DC row
  IndexRange crop_cols;            // columns 0..floor(W'/2)

  double operator()(std::size_t row, std::size_t col) const {
    return values[row * cols + col];
  }
};

/// Vertical window over the DC-centered rows 0..H-1:
/// clip((R + H/(2 S_h) - |floor(H/2) - m|) / R, 0, 1).
std::vector<double> mask_h(const MaskSpec& spec);

/// Horizontal window over the stored columns 0..floor(W/2):
/// clip((R + W/(2 S_w) + 1 - n) / R, 0, 1).
std::vector<double> mask_w(const MaskSpec& spec);

struct MaskDerivatives {
  std::vector<double> d_vertical;    // d mask_h / d S_h
  std::vector<double> d_horizontal;  // d mask_w / d S_w
};

/// Closed-form stride derivatives of both windows. Zero wherever the clip
/// is active, including the kink points themselves.
MaskDerivatives dmask_dstride(const MaskSpec& spec);

/// Output size floor(H / S_h + 2R) x floor(W / S_w + 2R), clipped to the
/// input size.
TargetShape target_shape(const MaskSpec& spec);

/// Rows kept when cropping a DC-centered column of `height` rows down to
/// `target` rows: frequencies -floor(target/2) .. ceil(target/2) - 1.
IndexRange centered_rows(std::size_t height, std::size_t target);

/// Columns kept when cropping a half-spectrum to spatial width `target`.
IndexRange leading_cols(std::size_t target);

CropMask build_crop_mask(const MaskSpec& spec);

}  // namespace diffstride::masking
