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
#include <span>
#include <vector>

#include "diffstride/tensor.hpp"

// Forward/backward kernels. Backward functions *accumulate* parameter
// gradients into the provided spans and return the input gradient.
namespace diffstride::nn {

/// Kernel layout (kh, kw, cin, cout), cout innermost.
struct ConvShape {
  std::size_t kh = 1;
  std::size_t kw = 1;
  std::size_t cin = 1;
  std::size_t cout = 1;

  std::size_t size() const { return kh * kw * cin * cout; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t ci, std::size_t co) const {
    return ((i * kw + j) * cin + ci) * cout + co;
  }
};

/// Stride-1 cross-correlation with zero "same" padding. `bias` may be empty.
RealTensor conv2d(const RealTensor& x, std::span<const double> kernel, const ConvShape& ks,
                  std::span<const double> bias = {});

RealTensor conv2d_backward(const RealTensor& gout, const RealTensor& x,
                           std::span<const double> kernel, const ConvShape& ks,
                           std::span<double> grad_kernel, std::span<double> grad_bias = {});

RealTensor relu(const RealTensor& x);
RealTensor relu_backward(const RealTensor& gout, const RealTensor& x);

/// Per-channel mean over space; output shape (1, 1, C).
RealTensor global_avg_pool(const RealTensor& x);
RealTensor global_avg_pool_backward(const RealTensor& gout, Shape3 input_shape);

/// Per-channel max over space, (1, 1, C). `argmax` receives the flat
/// spatial index h * W + w of the first maximum per channel.
RealTensor global_max_pool(const RealTensor& x, std::vector<std::size_t>& argmax);
RealTensor global_max_pool_backward(const RealTensor& gout, Shape3 input_shape,
                                    std::span<const std::size_t> argmax);

/// y = x W + b on the flattened input. `weight` is (in, out) row-major.
RealTensor dense(const RealTensor& x, std::span<const double> weight,
                 std::span<const double> bias, std::size_t out_features);
RealTensor dense_backward(const RealTensor& gout, const RealTensor& x,
                          std::span<const double> weight, std::size_t out_features,
                          std::span<double> grad_weight, std::span<double> grad_bias);

/// Softmax cross-entropy of one example. `grad_logits` receives
/// softmax(logits) - onehot(label).
double softmax_cross_entropy(const RealTensor& logits, std::size_t label,
                             RealTensor* grad_logits = nullptr);

/// Keeps every `stride_h`-th row and `stride_w`-th column starting at 0.
RealTensor strided_subsample(const RealTensor& x, std::size_t stride_h, std::size_t stride_w);
RealTensor strided_subsample_backward(const RealTensor& gout, Shape3 input_shape,
                                      std::size_t stride_h, std::size_t stride_w);

RealTensor add(const RealTensor& a, const RealTensor& b);

}  // namespace diffstride::nn
