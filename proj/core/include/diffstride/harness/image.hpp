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
#include <filesystem>
#include <string>
#include <utility>

#include "diffstride/tensor.hpp"

namespace diffstride::harness {

/// 8-bit image held as (rows, cols, channels) doubles in [0, max_val].
/// One channel for P5 (PGM), three for P6 (PPM).
struct Image {
  RealTensor pixels;
  int max_val = 255;
};

/// Parses binary P5/P6 with max_val <= 255. Comments in the header are
/// allowed. Throws std::runtime_error on malformed input.
Image read_pnm(const std::filesystem::path& path);
Image parse_pnm(const std::string& bytes);

/// Rounds to the nearest integer, clamps to [0, max_val], writes P5 or P6.
void write_pnm(const std::filesystem::path& path, const Image& image);
std::string encode_pnm(const Image& image);

enum class ResizeMode { kSpectral, kDiffStrideMask };

ResizeMode parse_resize_mode(const std::string& name);

/// kSpectral crops the spectrum to floor(H/S_h) x floor(W/S_w);
/// kDiffStrideMask applies the smooth stride window and its crop. Pixels
/// are rescaled so a constant image keeps its value, then clamped.
Image resize_image(const Image& in, std::pair<double, double> strides, double smoothness,
                   ResizeMode mode);

}  // namespace diffstride::harness
