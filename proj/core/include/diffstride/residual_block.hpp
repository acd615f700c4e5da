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

#include <span>
#include <utility>

#include "diffstride/layer.hpp"
#include "diffstride/nn/tape.hpp"

namespace diffstride::layer {

/// Convolutions of a shortcut block whose two branches share one DiffStride.
/// `main` is an odd-sized (kh, kw, cin, cout) kernel, `skip` a 1x1 kernel
/// with the same cin and cout.
struct ResidualBlockWeights {
  nn::Parameter main;
  nn::Parameter skip;
};

struct ResidualBlockOutput {
  RealTensor output;
  Shape3 main_shape;
  Shape3 skip_shape;
};

/// Records main = DiffStride(relu(conv_main(x))) and
/// skip = DiffStride(conv_skip(x)) on `tape` and returns main + skip. Both
/// branches read the same `params`, so their stride gradients land in the
/// same sink.
nn::Var residual_block(nn::Tape& tape, nn::Var x, const ResidualBlockWeights& weights,
                       const StrideParams& params, double smoothness,
                       std::span<double> grad_main, std::span<double> grad_skip,
                       std::pair<double, double>* grad_strides);

/// Forward-only evaluation of the block.
ResidualBlockOutput residual_block_forward(const RealTensor& x,
                                           const ResidualBlockWeights& weights,
                                           const StrideParams& params, double smoothness);

}  // namespace diffstride::layer
