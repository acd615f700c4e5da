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

#include "diffstride/residual_block.hpp"

#include <stdexcept>
#include <vector>

namespace diffstride::layer {

namespace {

void check_weights(const ResidualBlockWeights& w) {
  const nn::ConvShape main = nn::conv_shape(w.main);
  const nn::ConvShape skip = nn::conv_shape(w.skip);
  if (skip.kh != 1 || skip.kw != 1) {
    throw std::invalid_argument("residual block: skip convolution must be 1x1");
  }
  if (main.cout != skip.cout || main.cin != skip.cin) {
    throw std::invalid_argument("residual block: branch channel mismatch (main " +
                                std::to_string(main.cin) + "->" + std::to_string(main.cout) +
                                ", skip " + std::to_string(skip.cin) + "->" +
                                std::to_string(skip.cout) + ")");
  }
}

}  // namespace

nn::Var residual_block(nn::Tape& tape, nn::Var x, const ResidualBlockWeights& weights,
                       const StrideParams& params, double smoothness,
                       std::span<double> grad_main, std::span<double> grad_skip,
                       std::pair<double, double>* grad_strides) {
  check_weights(weights);
  nn::Var main = nn::conv2d(tape, x, weights.main, nullptr, grad_main, {});
  main = nn::relu(tape, main);
  main = nn::diffstride(tape, main, params, smoothness, grad_strides);
  nn::Var skip = nn::conv2d(tape, x, weights.skip, nullptr, grad_skip, {});
  skip = nn::diffstride(tape, skip, params, smoothness, grad_strides);
  if (tape.value(main).shape() != tape.value(skip).shape()) {
    throw std::logic_error("residual block: branch shapes diverged " +
                           to_string(tape.value(main).shape()) + " vs " +
                           to_string(tape.value(skip).shape()));
  }
  return nn::add(tape, main, skip);
}

ResidualBlockOutput residual_block_forward(const RealTensor& x,
                                           const ResidualBlockWeights& weights,
                                           const StrideParams& params, double smoothness) {
  check_weights(weights);
  const nn::ConvShape main_ks = nn::conv_shape(weights.main);
  const nn::ConvShape skip_ks = nn::conv_shape(weights.skip);
  RealTensor main = nn::relu(nn::conv2d(x, weights.main.value, main_ks));
  main = diffstride_forward(main, params, smoothness).output;
  RealTensor skip = nn::conv2d(x, weights.skip.value, skip_ks);
  skip = diffstride_forward(skip, params, smoothness).output;

  ResidualBlockOutput out;
  out.main_shape = main.shape();
  out.skip_shape = skip.shape();
  if (out.main_shape != out.skip_shape) {
    throw std::logic_error("residual block: branch shapes diverged " +
                           to_string(out.main_shape) + " vs " + to_string(out.skip_shape));
  }
  out.output = nn::add(main, skip);
  return out;
}

}  // namespace diffstride::layer
