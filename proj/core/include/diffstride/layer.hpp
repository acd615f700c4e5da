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
#include <optional>
#include <utility>

#include "diffstride/masking.hpp"
#include "diffstride/spectrum.hpp"
#include "diffstride/tensor.hpp"

namespace diffstride::layer {

/// Margin keeping strides strictly inside the open upper bound of [1, H).
inline constexpr double kBoxMargin = 1e-3;

/// Learnable (S_h, S_w) with their gradient accumulators and feasible box.
struct StrideParams {
  double s_h = 1.0;
  double s_w = 1.0;
  double grad_h = 0.0;
  double grad_w = 0.0;
  std::size_t bound_h = 1;  // input rows of the layer
  std::size_t bound_w = 1;  // input cols of the layer
  bool shared = false;      // tie s_h == s_w

  StrideParams() = default;
  StrideParams(double sh, double sw, std::size_t in_h, std::size_t in_w, bool tie = false);

  void zero_grad() { grad_h = grad_w = 0.0; }
  /// Adds one backward pass worth of gradient. Tied strides receive the sum
  /// of both partials in both accumulators.
  void accumulate(double gh, double gw);
  bool in_box() const;
};

/// Clamps each stride into [1, bound - kBoxMargin] (exactly 1 for a
/// one-pixel axis) and re-ties shared strides.
StrideParams project_strides(StrideParams params);

/// Everything the backward pass needs; produced by one forward, consumed by
/// at most one backward.
struct DiffStrideContext {
  spectrum::HalfSpectrum spectrum;  // y = F(x), before masking
  masking::MaskSpec spec;
  masking::CropMask mask;
  Shape3 input_shape;
  masking::IndexRange rows;  // crop extents frozen at forward time
  masking::IndexRange cols;
  masking::TargetShape output;
  bool consumed = false;
};

struct DiffStrideResult {
  RealTensor output;
  DiffStrideContext context;
};

struct DiffStrideGrads {
  RealTensor input;
  double stride_h = 0.0;
  double stride_w = 0.0;
};

/// DFT, low-pass by the learnable window, crop to the window's target
/// shape, inverse DFT. `pinned` overrides the crop extent (used to evaluate
/// the loss with crop extents frozen at some base point).
DiffStrideResult diffstride_forward(const RealTensor& x, const StrideParams& params,
                                    double smoothness,
                                    std::optional<masking::TargetShape> pinned = std::nullopt);

/// Input and stride gradients for an upstream gradient `gout`. Marks the
/// context consumed; a second call on the same context throws.
DiffStrideGrads diffstride_vjp(const RealTensor& gout, DiffStrideContext& ctx);

/// `diffstride_vjp` followed by accumulation of the stride gradients into
/// `params`. Returns the input gradient.
RealTensor diffstride_backward(const RealTensor& gout, DiffStrideContext& ctx,
                               StrideParams& params);

/// Output shape of the fixed-stride baseline, floor(H/S_h) x floor(W/S_w).
masking::TargetShape spectral_pool_shape(Shape3 input, std::pair<double, double> strides);

/// Fixed-stride spectral pooling: DFT, hard center crop, inverse DFT.
RealTensor spectral_pool(const RealTensor& x, std::pair<double, double> strides);

/// Input gradient of `spectral_pool`; `gout` has the pooled shape.
RealTensor spectral_pool_vjp(const RealTensor& gout, Shape3 input_shape);

/// Keeps `rows` x `cols` of a half-spectrum and re-labels it as the
/// spectrum of a signal of width `spatial_width`.
spectrum::HalfSpectrum crop_spectrum(const spectrum::HalfSpectrum& y,
                                     masking::IndexRange rows, masking::IndexRange cols,
                                     std::size_t spatial_width);

/// Adjoint of `crop_spectrum`: zero-pads back to (height, spatial_width).
spectrum::HalfSpectrum pad_spectrum(const spectrum::HalfSpectrum& g,
                                    masking::IndexRange rows, masking::IndexRange cols,
                                    std::size_t height, std::size_t spatial_width);

}  // namespace diffstride::layer
