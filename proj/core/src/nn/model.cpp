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

#include "diffstride/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <tuple>

namespace diffstride::nn {

std::string to_string(DownsampleKind kind) {
  switch (kind) {
    case DownsampleKind::kStrided: return "strided";
    case DownsampleKind::kSpectral: return "spectral";
    case DownsampleKind::kDiffStride: return "diffstride";
  }
  return "unknown";
}

DownsampleKind parse_downsample_kind(const std::string& name) {
  if (name == "strided" || name == "strided-crop-baseline") return DownsampleKind::kStrided;
  if (name == "spectral" || name == "spectral-pool") return DownsampleKind::kSpectral;
  if (name == "diffstride") return DownsampleKind::kDiffStride;
  throw std::invalid_argument("unknown downsampling kind '" + name + "'");
}

std::string to_string(GlobalPool pool) { return pool == GlobalPool::kAvg ? "avg" : "max"; }

GlobalPool parse_global_pool(const std::string& name) {
  if (name == "avg") return GlobalPool::kAvg;
  if (name == "max") return GlobalPool::kMax;
  throw std::invalid_argument("unknown global pool '" + name + "'");
}

void ModelSpec::validate() const {
  if (input_height == 0 || input_width == 0 || input_channels == 0) {
    throw std::invalid_argument("ModelSpec: empty input");
  }
  if (classes < 2) throw std::invalid_argument("ModelSpec: need at least two classes");
  if (channels.empty()) throw std::invalid_argument("ModelSpec: need at least one block");
  if (stride_init.size() != channels.size()) {
    throw std::invalid_argument("ModelSpec: one stride init per block required");
  }
  if (kernel % 2 == 0) throw std::invalid_argument("ModelSpec: kernel size must be odd");
  if (!(smoothness > 0.0)) throw std::invalid_argument("ModelSpec: smoothness must be > 0");
}

std::pair<std::size_t, std::size_t> downsampled_size(DownsampleKind kind, std::size_t height,
                                                     std::size_t width,
                                                     const layer::StrideParams& s,
                                                     double smoothness) {
  switch (kind) {
    case DownsampleKind::kStrided: {
      const auto sh = static_cast<std::size_t>(std::lround(s.s_h));
      const auto sw = static_cast<std::size_t>(std::lround(s.s_w));
      return {(height + sh - 1) / sh, (width + sw - 1) / sw};
    }
    case DownsampleKind::kSpectral: {
      const auto t = layer::spectral_pool_shape(Shape3{height, width, 1}, {s.s_h, s.s_w});
      return {t.height, t.width};
    }
    case DownsampleKind::kDiffStride: {
      masking::MaskSpec spec{height, width, smoothness, s.s_h, s.s_w};
      const auto t = masking::target_shape(spec);
      return {t.height, t.width};
    }
  }
  throw std::logic_error("downsampled_size: unknown kind");
}

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::size_t cin = spec_.input_channels;
  for (std::size_t l = 0; l < spec_.channels.size(); ++l) {
    const std::size_t cout = spec_.channels[l];
    const std::string prefix = "conv" + std::to_string(l + 1);
    Parameter kernel{prefix + ".kernel", {spec_.kernel, spec_.kernel, cin, cout}, {}, true};
    const double std_dev =
        std::sqrt(2.0 / static_cast<double>(spec_.kernel * spec_.kernel * cin));
    kernel.value.resize(spec_.kernel * spec_.kernel * cin * cout);
    for (double& v : kernel.value) v = std_dev * normal(rng);
    params_.push_back(std::move(kernel));
    params_.push_back(Parameter{prefix + ".bias", {cout}, std::vector<double>(cout, 0.0), false});

    const auto [sh, sw] = spec_.stride_init[l];
    strides_.emplace_back(sh, sw, 1, 1, spec_.shared_strides);
    cin = cout;
  }
  Parameter weight{"dense.weight", {cin, spec_.classes}, {}, true};
  weight.value.resize(cin * spec_.classes);
  const double std_dev = std::sqrt(1.0 / static_cast<double>(cin));
  for (double& v : weight.value) v = std_dev * normal(rng);
  params_.push_back(std::move(weight));
  params_.push_back(
      Parameter{"dense.bias", {spec_.classes}, std::vector<double>(spec_.classes, 0.0), false});

  refresh_bounds();
  for (std::size_t l = 0; l < strides_.size(); ++l) {
    if (!strides_[l].in_box()) {
      throw std::invalid_argument("Model: stride init of block " + std::to_string(l + 1) +
                                  " is outside its feasible box");
    }
  }
}

void Model::refresh_bounds() {
  std::size_t h = spec_.input_height;
  std::size_t w = spec_.input_width;
  for (layer::StrideParams& s : strides_) {
    s.bound_h = h;
    s.bound_w = w;
    std::tie(h, w) = downsampled_size(spec_.kind, h, w, s, spec_.smoothness);
  }
}

void Model::project_strides() {
  std::size_t h = spec_.input_height;
  std::size_t w = spec_.input_width;
  for (layer::StrideParams& s : strides_) {
    s.bound_h = h;
    s.bound_w = w;
    s = layer::project_strides(s);
    std::tie(h, w) = downsampled_size(spec_.kind, h, w, s, spec_.smoothness);
  }
}

Var Model::build(Tape& tape, const RealTensor& x, Gradients* grads) const {
  if (x.height() != spec_.input_height || x.width() != spec_.input_width ||
      x.channels() != spec_.input_channels) {
    throw std::invalid_argument("Model: input shape " + to_string(x.shape()) +
                                " does not match the model");
  }
  const auto grad_of = [&](std::size_t i) -> std::span<double> {
    return grads ? std::span<double>(grads->params[i]) : std::span<double>{};
  };

  Var h = tape.leaf(x);
  std::size_t p = 0;
  for (std::size_t l = 0; l < spec_.channels.size(); ++l) {
    h = conv2d(tape, h, params_[p], &params_[p + 1], grad_of(p), grad_of(p + 1));
    p += 2;
    const layer::StrideParams& s = strides_[l];
    switch (spec_.kind) {
      case DownsampleKind::kDiffStride:
        h = diffstride(tape, h, s, spec_.smoothness, grads ? &grads->strides[l] : nullptr);
        break;
      case DownsampleKind::kSpectral:
        h = spectral_pool(tape, h, {s.s_h, s.s_w});
        break;
      case DownsampleKind::kStrided:
        h = strided_subsample(tape, h, static_cast<std::size_t>(std::lround(s.s_h)),
                              static_cast<std::size_t>(std::lround(s.s_w)));
        break;
    }
    h = relu(tape, h);
  }
  h = spec_.pool == GlobalPool::kAvg ? global_avg_pool(tape, h) : global_max_pool(tape, h);
  return dense(tape, h, params_[p], params_[p + 1], grad_of(p), grad_of(p + 1));
}

Model::ExampleResult Model::loss_and_grad(const RealTensor& x, std::size_t label,
                                          Gradients& grads, double grad_scale) const {
  Tape tape;
  const Var logits = build(tape, x, &grads);
  const Var loss = softmax_cross_entropy(tape, logits, label);
  ExampleResult r;
  r.loss = tape.value(loss).data()[0];
  const auto z = tape.value(logits).data();
  r.predicted = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
  tape.backward(loss, grad_scale);
  return r;
}

RealTensor Model::logits(const RealTensor& x) const {
  Tape tape;
  return tape.value(build(tape, x, nullptr));
}

std::size_t Model::predict(const RealTensor& x) const {
  const RealTensor z = logits(x);
  const auto d = z.data();
  return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
}

regularizer::StrideStack Model::stride_stack() const {
  regularizer::StrideStack stack;
  for (const layer::StrideParams& s : strides_) stack.strides.emplace_back(s.s_h, s.s_w);
  return stack;
}

std::vector<NamedArray> Model::to_arrays() const {
  std::vector<NamedArray> out;
  for (const Parameter& p : params_) out.push_back(NamedArray{p.name, p.shape, p.value});
  for (std::size_t l = 0; l < strides_.size(); ++l) {
    out.push_back(NamedArray{"stride" + std::to_string(l + 1), {2},
                             {strides_[l].s_h, strides_[l].s_w}});
  }
  return out;
}

void Model::load_arrays(const std::vector<NamedArray>& arrays) {
  if (arrays.size() != params_.size() + strides_.size()) {
    throw std::invalid_argument("Model::load_arrays: array count mismatch");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (arrays[i].name != params_[i].name || arrays[i].shape != params_[i].shape) {
      throw std::invalid_argument("Model::load_arrays: unexpected array '" + arrays[i].name + "'");
    }
    params_[i].value = arrays[i].data;
  }
  for (std::size_t l = 0; l < strides_.size(); ++l) {
    const NamedArray& a = arrays[params_.size() + l];
    if (a.data.size() != 2) throw std::invalid_argument("Model::load_arrays: bad stride array");
    strides_[l].s_h = a.data[0];
    strides_[l].s_w = a.data[1];
  }
  refresh_bounds();
}

}  // namespace diffstride::nn
