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
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "diffstride/layer.hpp"
#include "diffstride/nn/checkpoint.hpp"
#include "diffstride/nn/tape.hpp"
#include "diffstride/regularizer.hpp"

namespace diffstride::nn {

enum class DownsampleKind {
  kStrided,     // integer spatial subsampling (round(S)), frozen
  kSpectral,    // fixed-stride spectral pooling, frozen
  kDiffStride,  // learnable strides
};

std::string to_string(DownsampleKind kind);
DownsampleKind parse_downsample_kind(const std::string& name);

enum class GlobalPool { kAvg, kMax };

std::string to_string(GlobalPool pool);
GlobalPool parse_global_pool(const std::string& name);

/// conv(k x k, same) -> downsample -> relu, repeated once per entry of
/// `channels`, then a global pool and one dense classification layer.
struct ModelSpec {
  std::size_t input_height = 16;
  std::size_t input_width = 16;
  std::size_t input_channels = 1;
  std::size_t classes = 2;
  std::vector<std::size_t> channels{8, 8};
  std::size_t kernel = 3;
  std::vector<std::pair<double, double>> stride_init{{2.0, 2.0}, {2.0, 2.0}};
  double smoothness = 4.0;
  DownsampleKind kind = DownsampleKind::kDiffStride;
  GlobalPool pool = GlobalPool::kAvg;
  bool shared_strides = false;

  void validate() const;
};

/// Output spatial size of one downsampling layer of the given kind.
std::pair<std::size_t, std::size_t> downsampled_size(DownsampleKind kind, std::size_t height,
                                                     std::size_t width,
                                                     const layer::StrideParams& s,
                                                     double smoothness);

class Model {
 public:
  Model(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }
  std::vector<layer::StrideParams>& strides() { return strides_; }
  const std::vector<layer::StrideParams>& strides() const { return strides_; }
  bool learns_strides() const { return spec_.kind == DownsampleKind::kDiffStride; }

  struct ExampleResult {
    double loss = 0.0;
    std::size_t predicted = 0;
  };

  /// Cross-entropy of one example; gradients (scaled by `grad_scale`) are
  /// added to `grads`.
  ExampleResult loss_and_grad(const RealTensor& x, std::size_t label, Gradients& grads,
                              double grad_scale = 1.0) const;

  RealTensor logits(const RealTensor& x) const;
  std::size_t predict(const RealTensor& x) const;

  /// Recomputes every stride box from the spatial sizes the current strides
  /// produce upstream.
  void refresh_bounds();
  /// Projects strides into their boxes front to back, refreshing each
  /// downstream box from the projected upstream strides.
  void project_strides();

  regularizer::StrideStack stride_stack() const;

  std::vector<NamedArray> to_arrays() const;
  void load_arrays(const std::vector<NamedArray>& arrays);

 private:
  Var build(Tape& tape, const RealTensor& x, Gradients* grads) const;

  ModelSpec spec_;
  std::vector<Parameter> params_;  // conv_l.kernel, conv_l.bias ..., dense.weight, dense.bias
  std::vector<layer::StrideParams> strides_;
};

}  // namespace diffstride::nn
