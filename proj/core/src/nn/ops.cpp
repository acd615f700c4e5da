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

#include "diffstride/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace diffstride::nn {

namespace {

void check_conv(const RealTensor& x, std::span<const double> kernel, const ConvShape& ks,
                std::size_t bias_size) {
  if (ks.kh % 2 == 0 || ks.kw % 2 == 0) {
    throw std::invalid_argument("conv2d: kernel spatial dims must be odd");
  }
  if (kernel.size() != ks.size()) {
    throw std::invalid_argument("conv2d: kernel buffer has " + std::to_string(kernel.size()) +
                                " entries, expected " + std::to_string(ks.size()));
  }
  if (x.channels() != ks.cin) {
    throw std::invalid_argument("conv2d: input has " + std::to_string(x.channels()) +
                                " channels, kernel expects " + std::to_string(ks.cin));
  }
  if (bias_size != 0 && bias_size != ks.cout) {
    throw std::invalid_argument("conv2d: bias size does not match output channels");
  }
}

}  // namespace

RealTensor conv2d(const RealTensor& x, std::span<const double> kernel, const ConvShape& ks,
                  std::span<const double> bias) {
  check_conv(x, kernel, ks, bias.size());
  const long H = static_cast<long>(x.height());
  const long W = static_cast<long>(x.width());
  const long ph = static_cast<long>(ks.kh / 2);
  const long pw = static_cast<long>(ks.kw / 2);
  RealTensor y(Shape3{x.height(), x.width(), ks.cout});
  for (long h = 0; h < H; ++h) {
    for (long w = 0; w < W; ++w) {
      double* out = &y(static_cast<std::size_t>(h), static_cast<std::size_t>(w), 0);
      if (!bias.empty()) std::copy(bias.begin(), bias.end(), out);
      for (std::size_t i = 0; i < ks.kh; ++i) {
        const long hh = h + static_cast<long>(i) - ph;
        if (hh < 0 || hh >= H) continue;
        for (std::size_t j = 0; j < ks.kw; ++j) {
          const long ww = w + static_cast<long>(j) - pw;
          if (ww < 0 || ww >= W) continue;
          for (std::size_t ci = 0; ci < ks.cin; ++ci) {
            const double v = x(static_cast<std::size_t>(hh), static_cast<std::size_t>(ww), ci);
            const double* k = &kernel[ks.index(i, j, ci, 0)];
            for (std::size_t co = 0; co < ks.cout; ++co) out[co] += v * k[co];
          }
        }
      }
    }
  }
  return y;
}

RealTensor conv2d_backward(const RealTensor& gout, const RealTensor& x,
                           std::span<const double> kernel, const ConvShape& ks,
                           std::span<double> grad_kernel, std::span<double> grad_bias) {
  check_conv(x, kernel, ks, grad_bias.size());
  if (gout.height() != x.height() || gout.width() != x.width() || gout.channels() != ks.cout) {
    throw std::invalid_argument("conv2d_backward: gradient shape mismatch");
  }
  if (grad_kernel.size() != ks.size()) {
    throw std::invalid_argument("conv2d_backward: kernel gradient buffer size mismatch");
  }
  const long H = static_cast<long>(x.height());
  const long W = static_cast<long>(x.width());
  const long ph = static_cast<long>(ks.kh / 2);
  const long pw = static_cast<long>(ks.kw / 2);
  RealTensor gin(x.shape());
  for (long h = 0; h < H; ++h) {
    for (long w = 0; w < W; ++w) {
      const double* g = gout.data().data() + (static_cast<std::size_t>(h * W + w)) * ks.cout;
      if (!grad_bias.empty()) {
        for (std::size_t co = 0; co < ks.cout; ++co) grad_bias[co] += g[co];
      }
      for (std::size_t i = 0; i < ks.kh; ++i) {
        const long hh = h + static_cast<long>(i) - ph;
        if (hh < 0 || hh >= H) continue;
        for (std::size_t j = 0; j < ks.kw; ++j) {
          const long ww = w + static_cast<long>(j) - pw;
          if (ww < 0 || ww >= W) continue;
          for (std::size_t ci = 0; ci < ks.cin; ++ci) {
            const auto uh = static_cast<std::size_t>(hh);
            const auto uw = static_cast<std::size_t>(ww);
            const double v = x(uh, uw, ci);
            const std::size_t base = ks.index(i, j, ci, 0);
            double acc = 0.0;
            for (std::size_t co = 0; co < ks.cout; ++co) {
              grad_kernel[base + co] += v * g[co];
              acc += kernel[base + co] * g[co];
            }
            gin(uh, uw, ci) += acc;
          }
        }
      }
    }
  }
  return gin;
}

RealTensor relu(const RealTensor& x) {
  RealTensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = std::max(x.data()[i], 0.0);
  return y;
}

RealTensor relu_backward(const RealTensor& gout, const RealTensor& x) {
  if (gout.shape() != x.shape()) throw std::invalid_argument("relu_backward: shape mismatch");
  RealTensor gin(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    gin.data()[i] = x.data()[i] > 0.0 ? gout.data()[i] : 0.0;
  }
  return gin;
}

RealTensor global_avg_pool(const RealTensor& x) {
  RealTensor y(Shape3{1, 1, x.channels()});
  const double inv = 1.0 / static_cast<double>(x.height() * x.width());
  for (std::size_t h = 0; h < x.height(); ++h) {
    for (std::size_t w = 0; w < x.width(); ++w) {
      for (std::size_t c = 0; c < x.channels(); ++c) y(0, 0, c) += x(h, w, c);
    }
  }
  for (double& v : y.data()) v *= inv;
  return y;
}

RealTensor global_avg_pool_backward(const RealTensor& gout, Shape3 input_shape) {
  if (gout.size() != input_shape.channels) {
    throw std::invalid_argument("global_avg_pool_backward: gradient size mismatch");
  }
  RealTensor gin(input_shape);
  const double inv = 1.0 / static_cast<double>(input_shape.height * input_shape.width);
  for (std::size_t h = 0; h < input_shape.height; ++h) {
    for (std::size_t w = 0; w < input_shape.width; ++w) {
      for (std::size_t c = 0; c < input_shape.channels; ++c) {
        gin(h, w, c) = gout.data()[c] * inv;
      }
    }
  }
  return gin;
}

RealTensor global_max_pool(const RealTensor& x, std::vector<std::size_t>& argmax) {
  RealTensor y(Shape3{1, 1, x.channels()});
  argmax.assign(x.channels(), 0);
  for (std::size_t c = 0; c < x.channels(); ++c) {
    double best = x(0, 0, c);
    std::size_t best_i = 0;
    for (std::size_t h = 0; h < x.height(); ++h) {
      for (std::size_t w = 0; w < x.width(); ++w) {
        if (x(h, w, c) > best) {
          best = x(h, w, c);
          best_i = h * x.width() + w;
        }
      }
    }
    y(0, 0, c) = best;
    argmax[c] = best_i;
  }
  return y;
}

RealTensor global_max_pool_backward(const RealTensor& gout, Shape3 input_shape,
                                    std::span<const std::size_t> argmax) {
  if (gout.size() != input_shape.channels || argmax.size() != input_shape.channels) {
    throw std::invalid_argument("global_max_pool_backward: gradient size mismatch");
  }
  RealTensor gin(input_shape);
  for (std::size_t c = 0; c < input_shape.channels; ++c) {
    const std::size_t h = argmax[c] / input_shape.width;
    const std::size_t w = argmax[c] % input_shape.width;
    gin(h, w, c) = gout.data()[c];
  }
  return gin;
}

RealTensor dense(const RealTensor& x, std::span<const double> weight,
                 std::span<const double> bias, std::size_t out_features) {
  const std::size_t in = x.size();
  if (weight.size() != in * out_features || bias.size() != out_features) {
    throw std::invalid_argument("dense: weight/bias shape mismatch for " + std::to_string(in) +
                                " -> " + std::to_string(out_features));
  }
  RealTensor y(Shape3{1, 1, out_features});
  std::copy(bias.begin(), bias.end(), y.data().begin());
  for (std::size_t i = 0; i < in; ++i) {
    const double v = x.data()[i];
    for (std::size_t o = 0; o < out_features; ++o) y.data()[o] += v * weight[i * out_features + o];
  }
  return y;
}

RealTensor dense_backward(const RealTensor& gout, const RealTensor& x,
                          std::span<const double> weight, std::size_t out_features,
                          std::span<double> grad_weight, std::span<double> grad_bias) {
  const std::size_t in = x.size();
  if (gout.size() != out_features || grad_weight.size() != in * out_features ||
      grad_bias.size() != out_features || weight.size() != in * out_features) {
    throw std::invalid_argument("dense_backward: shape mismatch");
  }
  RealTensor gin(x.shape());
  for (std::size_t o = 0; o < out_features; ++o) grad_bias[o] += gout.data()[o];
  for (std::size_t i = 0; i < in; ++i) {
    double acc = 0.0;
    for (std::size_t o = 0; o < out_features; ++o) {
      grad_weight[i * out_features + o] += x.data()[i] * gout.data()[o];
      acc += weight[i * out_features + o] * gout.data()[o];
    }
    gin.data()[i] = acc;
  }
  return gin;
}

double softmax_cross_entropy(const RealTensor& logits, std::size_t label,
                             RealTensor* grad_logits) {
  const std::size_t K = logits.size();
  if (label >= K) {
    throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                " out of range for " + std::to_string(K) + " classes");
  }
  const auto v = logits.data();
  const double mx = *std::max_element(v.begin(), v.end());
  double denom = 0.0;
  for (double z : v) denom += std::exp(z - mx);
  const double log_z = mx + std::log(denom);
  if (grad_logits != nullptr) {
    *grad_logits = RealTensor(logits.shape());
    for (std::size_t k = 0; k < K; ++k) {
      grad_logits->data()[k] = std::exp(v[k] - log_z) - (k == label ? 1.0 : 0.0);
    }
  }
  return log_z - v[label];
}

RealTensor strided_subsample(const RealTensor& x, std::size_t stride_h, std::size_t stride_w) {
  if (stride_h == 0 || stride_w == 0) {
    throw std::invalid_argument("strided_subsample: strides must be >= 1");
  }
  const std::size_t H = (x.height() + stride_h - 1) / stride_h;
  const std::size_t W = (x.width() + stride_w - 1) / stride_w;
  RealTensor y(Shape3{H, W, x.channels()});
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t w = 0; w < W; ++w) {
      for (std::size_t c = 0; c < x.channels(); ++c) y(h, w, c) = x(h * stride_h, w * stride_w, c);
    }
  }
  return y;
}

RealTensor strided_subsample_backward(const RealTensor& gout, Shape3 input_shape,
                                      std::size_t stride_h, std::size_t stride_w) {
  RealTensor gin(input_shape);
  for (std::size_t h = 0; h < gout.height(); ++h) {
    for (std::size_t w = 0; w < gout.width(); ++w) {
      for (std::size_t c = 0; c < gout.channels(); ++c) {
        gin(h * stride_h, w * stride_w, c) = gout(h, w, c);
      }
    }
  }
  return gin;
}

RealTensor add(const RealTensor& a, const RealTensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("add: shape mismatch " + to_string(a.shape()) + " vs " +
                                to_string(b.shape()));
  }
  RealTensor y(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) y.data()[i] = a.data()[i] + b.data()[i];
  return y;
}

}  // namespace diffstride::nn
