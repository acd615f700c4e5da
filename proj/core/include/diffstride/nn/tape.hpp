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
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diffstride/layer.hpp"
#include "diffstride/nn/ops.hpp"
#include "diffstride/tensor.hpp"

namespace diffstride::nn {

/// A named trainable array. Conv kernels are (kh, kw, cin, cout), dense
/// weights (in, out), biases (out).
struct Parameter {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  bool decay = true;  // weight decay applies (false for biases)

  std::size_t size() const { return value.size(); }
};

ConvShape conv_shape(const Parameter& kernel);

/// Gradient buffers aligned with a model's parameter and stride lists.
struct Gradients {
  std::vector<std::vector<double>> params;
  std::vector<std::pair<double, double>> strides;

  static Gradients like(const std::vector<Parameter>& params, std::size_t num_strides);
  void zero();
  /// this += other, element by element in a fixed order.
  void add(const Gradients& other);
  void scale(double factor);
};

/// Dynamic reverse-mode record, rebuilt for every example. Nodes are
/// appended in evaluation order, so reverse index order is a valid reverse
/// topological order. A tape supports exactly one backward pass.
class Tape {
 public:
  using Var = std::size_t;
  using BackwardFn = std::function<void(Tape&, const RealTensor& gout)>;

  Var leaf(RealTensor value);
  Var record(RealTensor value, BackwardFn backward);

  const RealTensor& value(Var v) const { return nodes_.at(v).value; }
  /// Gradient reaching `v`; zeros when nothing flowed into it.
  RealTensor grad(Var v) const;
  void accumulate(Var v, const RealTensor& g);

  /// Seeds d(root)/d(root) = seed (root must hold one scalar) and runs every
  /// node's backward once, newest first.
  void backward(Var root, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    RealTensor value;
    RealTensor grad;
    bool has_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

using Var = Tape::Var;

Var conv2d(Tape& tape, Var x, const Parameter& kernel, const Parameter* bias,
           std::span<double> grad_kernel, std::span<double> grad_bias);
Var relu(Tape& tape, Var x);
Var add(Tape& tape, Var a, Var b);
/// DiffStride downsampling. Stride gradients are added to *grad_sink.
Var diffstride(Tape& tape, Var x, const layer::StrideParams& params, double smoothness,
               std::pair<double, double>* grad_sink);
Var spectral_pool(Tape& tape, Var x, std::pair<double, double> strides);
Var strided_subsample(Tape& tape, Var x, std::size_t stride_h, std::size_t stride_w);
Var global_avg_pool(Tape& tape, Var x);
Var global_max_pool(Tape& tape, Var x);
Var dense(Tape& tape, Var x, const Parameter& weight, const Parameter& bias,
          std::span<double> grad_weight, std::span<double> grad_bias);
/// Scalar cross-entropy node.
Var softmax_cross_entropy(Tape& tape, Var logits, std::size_t label);

}  // namespace diffstride::nn
