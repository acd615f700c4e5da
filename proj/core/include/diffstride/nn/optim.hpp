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
#include <string>
#include <vector>

#include "diffstride/layer.hpp"
#include "diffstride/nn/tape.hpp"

namespace diffstride::nn {

/// v <- momentum * v + (g + weight_decay * p);  p <- p - lr * v.
void sgd_momentum_step(std::span<double> param, std::span<const double> grad,
                       std::span<double> velocity, double lr, double momentum,
                       double weight_decay);

/// Bias-corrected Adam at 1-based step `t`, with L2 weight decay folded
/// into the gradient.
void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> m,
               std::span<double> v, std::size_t t, double lr, double beta1, double beta2,
               double eps, double weight_decay = 0.0);

struct OptimizerConfig {
  std::string name = "adam";  // "adam" | "sgd"
  double lr = 1e-2;
  double momentum = 0.9;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double stride_lr_scale = 1.0;  // strides step with lr * stride_lr_scale
};

/// Owns optimizer state for a parameter list plus a list of strides.
/// Weight decay never touches strides or parameters with decay == false.
/// Strides are projected into their boxes after every step; the optimizer
/// state itself is left as is when the projection clamps.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const std::vector<Parameter>& params,
            std::size_t num_strides);

  /// Applies one update from the gradient buffers in `grads` (parameters)
  /// and from the `grad_h`/`grad_w` fields of `strides`.
  void step(std::vector<Parameter>& params, std::span<const std::vector<double>> grads,
            std::vector<layer::StrideParams>& strides, bool update_strides);

  const OptimizerConfig& config() const { return config_; }
  std::size_t steps() const { return t_; }

 private:
  OptimizerConfig config_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::vector<double> stride_m_;  // 2 per layer
  std::vector<double> stride_v_;
};

}  // namespace diffstride::nn
