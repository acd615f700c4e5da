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

#include "diffstride/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace diffstride::nn {

void sgd_momentum_step(std::span<double> param, std::span<const double> grad,
                       std::span<double> velocity, double lr, double momentum,
                       double weight_decay) {
  if (grad.size() != param.size() || velocity.size() != param.size()) {
    throw std::invalid_argument("sgd_momentum_step: buffer size mismatch");
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grad[i] + weight_decay * param[i];
    param[i] -= lr * velocity[i];
  }
}

void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> m,
               std::span<double> v, std::size_t t, double lr, double beta1, double beta2,
               double eps, double weight_decay) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw std::invalid_argument("adam_step: buffer size mismatch");
  }
  if (t == 0) throw std::invalid_argument("adam_step: step counter is 1-based");
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] + weight_decay * param[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    param[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

Optimizer::Optimizer(OptimizerConfig config, const std::vector<Parameter>& params,
                     std::size_t num_strides)
    : config_(std::move(config)) {
  if (config_.name != "adam" && config_.name != "sgd") {
    throw std::invalid_argument("Optimizer: unknown optimizer '" + config_.name + "'");
  }
  for (const Parameter& p : params) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
  stride_m_.assign(2 * num_strides, 0.0);
  stride_v_.assign(2 * num_strides, 0.0);
}

void Optimizer::step(std::vector<Parameter>& params, std::span<const std::vector<double>> grads,
                     std::vector<layer::StrideParams>& strides, bool update_strides) {
  if (grads.size() != params.size() || params.size() != m_.size()) {
    throw std::invalid_argument("Optimizer::step: parameter list changed");
  }
  ++t_;
  const OptimizerConfig& c = config_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double wd = params[i].decay ? c.weight_decay : 0.0;
    if (c.name == "adam") {
      adam_step(params[i].value, grads[i], m_[i], v_[i], t_, c.lr, c.beta1, c.beta2, c.eps, wd);
    } else {
      sgd_momentum_step(params[i].value, grads[i], m_[i], c.lr, c.momentum, wd);
    }
  }
  if (!update_strides) return;
  if (2 * strides.size() != stride_m_.size()) {
    throw std::invalid_argument("Optimizer::step: stride list changed");
  }
  const double lr = c.lr * c.stride_lr_scale;
  for (std::size_t l = 0; l < strides.size(); ++l) {
    layer::StrideParams& s = strides[l];
    // Tied strides carry the summed partial in grad_h and move as one scalar.
    const std::size_t n = s.shared ? 1 : 2;
    double value[2] = {s.s_h, s.s_w};
    const double grad[2] = {s.grad_h, s.grad_w};
    const std::span<double> vs(value, n);
    const std::span<const double> gs(grad, n);
    const std::span<double> ms(stride_m_.data() + 2 * l, n);
    const std::span<double> vv(stride_v_.data() + 2 * l, n);
    if (c.name == "adam") {
      adam_step(vs, gs, ms, vv, t_, lr, c.beta1, c.beta2, c.eps, 0.0);
    } else {
      sgd_momentum_step(vs, gs, ms, lr, c.momentum, 0.0);
    }
    s.s_h = value[0];
    s.s_w = s.shared ? value[0] : value[1];
    s = layer::project_strides(s);
  }
}

}  // namespace diffstride::nn
