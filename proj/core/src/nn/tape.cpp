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

#include "diffstride/nn/tape.hpp"

#include <memory>
#include <stdexcept>

namespace diffstride::nn {

ConvShape conv_shape(const Parameter& kernel) {
  if (kernel.shape.size() != 4) {
    throw std::invalid_argument("conv kernel '" + kernel.name + "' must be rank 4");
  }
  return ConvShape{kernel.shape[0], kernel.shape[1], kernel.shape[2], kernel.shape[3]};
}

Gradients Gradients::like(const std::vector<Parameter>& params, std::size_t num_strides) {
  Gradients g;
  g.params.reserve(params.size());
  for (const Parameter& p : params) g.params.emplace_back(p.size(), 0.0);
  g.strides.assign(num_strides, {0.0, 0.0});
  return g;
}

void Gradients::zero() {
  for (auto& buf : params) std::fill(buf.begin(), buf.end(), 0.0);
  for (auto& s : strides) s = {0.0, 0.0};
}

void Gradients::add(const Gradients& other) {
  if (other.params.size() != params.size() || other.strides.size() != strides.size()) {
    throw std::invalid_argument("Gradients::add: layout mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = 0; j < params[i].size(); ++j) params[i][j] += other.params[i][j];
  }
  for (std::size_t i = 0; i < strides.size(); ++i) {
    strides[i].first += other.strides[i].first;
    strides[i].second += other.strides[i].second;
  }
}

void Gradients::scale(double factor) {
  for (auto& buf : params) {
    for (double& v : buf) v *= factor;
  }
  for (auto& s : strides) {
    s.first *= factor;
    s.second *= factor;
  }
}

Tape::Var Tape::leaf(RealTensor value) { return record(std::move(value), nullptr); }

Tape::Var Tape::record(RealTensor value, BackwardFn backward) {
  if (consumed_) throw std::logic_error("Tape: cannot record after backward");
  nodes_.push_back(Node{std::move(value), RealTensor{}, false, std::move(backward)});
  return nodes_.size() - 1;
}

RealTensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v);
  return n.has_grad ? n.grad : RealTensor(n.value.shape());
}

void Tape::accumulate(Var v, const RealTensor& g) {
  Node& n = nodes_.at(v);
  if (g.shape() != n.value.shape()) {
    throw std::invalid_argument("Tape::accumulate: gradient shape " + to_string(g.shape()) +
                                " does not match value " + to_string(n.value.shape()));
  }
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) n.grad.data()[i] += g.data()[i];
}

void Tape::backward(Var root, double seed) {
  if (consumed_) throw std::logic_error("Tape: backward already run");
  if (nodes_.at(root).value.size() != 1) {
    throw std::invalid_argument("Tape::backward: root must be a scalar");
  }
  consumed_ = true;
  accumulate(root, RealTensor(nodes_[root].value.shape(), seed));
  for (std::size_t i = root + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    // Callbacks only write to older nodes.
    n.backward(*this, n.grad);
  }
}

Var conv2d(Tape& tape, Var x, const Parameter& kernel, const Parameter* bias,
           std::span<double> grad_kernel, std::span<double> grad_bias) {
  const ConvShape ks = conv_shape(kernel);
  const std::span<const double> b =
      bias ? std::span<const double>(bias->value) : std::span<const double>{};
  RealTensor y = nn::conv2d(tape.value(x), kernel.value, ks, b);
  const Parameter* kp = &kernel;
  return tape.record(std::move(y), [x, kp, ks, grad_kernel, grad_bias](Tape& t,
                                                                       const RealTensor& g) {
    t.accumulate(x, conv2d_backward(g, t.value(x), kp->value, ks, grad_kernel, grad_bias));
  });
}

Var relu(Tape& tape, Var x) {
  return tape.record(nn::relu(tape.value(x)), [x](Tape& t, const RealTensor& g) {
    t.accumulate(x, relu_backward(g, t.value(x)));
  });
}

Var add(Tape& tape, Var a, Var b) {
  return tape.record(nn::add(tape.value(a), tape.value(b)), [a, b](Tape& t, const RealTensor& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var diffstride(Tape& tape, Var x, const layer::StrideParams& params, double smoothness,
               std::pair<double, double>* grad_sink) {
  auto result = layer::diffstride_forward(tape.value(x), params, smoothness);
  auto ctx = std::make_shared<layer::DiffStrideContext>(std::move(result.context));
  return tape.record(std::move(result.output), [x, ctx, grad_sink](Tape& t, const RealTensor& g) {
    layer::DiffStrideGrads grads = layer::diffstride_vjp(g, *ctx);
    if (grad_sink != nullptr) {
      grad_sink->first += grads.stride_h;
      grad_sink->second += grads.stride_w;
    }
    t.accumulate(x, grads.input);
  });
}

Var spectral_pool(Tape& tape, Var x, std::pair<double, double> strides) {
  const Shape3 in = tape.value(x).shape();
  return tape.record(layer::spectral_pool(tape.value(x), strides),
                     [x, in](Tape& t, const RealTensor& g) {
                       t.accumulate(x, layer::spectral_pool_vjp(g, in));
                     });
}

Var strided_subsample(Tape& tape, Var x, std::size_t stride_h, std::size_t stride_w) {
  const Shape3 in = tape.value(x).shape();
  return tape.record(nn::strided_subsample(tape.value(x), stride_h, stride_w),
                     [x, in, stride_h, stride_w](Tape& t, const RealTensor& g) {
                       t.accumulate(x, strided_subsample_backward(g, in, stride_h, stride_w));
                     });
}

Var global_avg_pool(Tape& tape, Var x) {
  const Shape3 in = tape.value(x).shape();
  return tape.record(nn::global_avg_pool(tape.value(x)), [x, in](Tape& t, const RealTensor& g) {
    t.accumulate(x, global_avg_pool_backward(g, in));
  });
}

Var global_max_pool(Tape& tape, Var x) {
  const Shape3 in = tape.value(x).shape();
  std::vector<std::size_t> argmax;
  RealTensor y = nn::global_max_pool(tape.value(x), argmax);
  return tape.record(std::move(y), [x, in, argmax = std::move(argmax)](Tape& t,
                                                                       const RealTensor& g) {
    t.accumulate(x, global_max_pool_backward(g, in, argmax));
  });
}

Var dense(Tape& tape, Var x, const Parameter& weight, const Parameter& bias,
          std::span<double> grad_weight, std::span<double> grad_bias) {
  const std::size_t out = bias.size();
  const Parameter* wp = &weight;
  return tape.record(nn::dense(tape.value(x), weight.value, bias.value, out),
                     [x, wp, out, grad_weight, grad_bias](Tape& t, const RealTensor& g) {
                       t.accumulate(x, dense_backward(g, t.value(x), wp->value, out,
                                                      grad_weight, grad_bias));
                     });
}

Var softmax_cross_entropy(Tape& tape, Var logits, std::size_t label) {
  RealTensor grad;
  const double loss = nn::softmax_cross_entropy(tape.value(logits), label, &grad);
  return tape.record(RealTensor(Shape3{1, 1, 1}, loss),
                     [logits, grad = std::move(grad)](Tape& t, const RealTensor& g) {
                       RealTensor scaled = grad;
                       for (double& v : scaled.data()) v *= g.data()[0];
                       t.accumulate(logits, scaled);
                     });
}

}  // namespace diffstride::nn
