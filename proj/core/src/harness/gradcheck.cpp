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

#include "diffstride/harness/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>

#include "diffstride/layer.hpp"
#include "diffstride/masking.hpp"
#include "diffstride/nn/model.hpp"
#include "diffstride/nn/ops.hpp"
#include "diffstride/nn/tape.hpp"
#include "diffstride/regularizer.hpp"
#include "diffstride/residual_block.hpp"
#include "diffstride/spectrum.hpp"

namespace diffstride::harness {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

RealTensor random_tensor(Rng& rng, Shape3 shape) {
  RealTensor t(shape);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : t.data()) v = normal(rng);
  return t;
}

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Central difference of f with respect to every entry of `values`.
std::vector<double> numeric_gradient(std::span<double> values, double step,
                                     const std::function<double()>& f) {
  std::vector<double> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double up = f();
    values[i] = saved - step;
    const double down = f();
    values[i] = saved;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

GradcheckRow make_row(std::string name, std::size_t n, double err, double tol) {
  return GradcheckRow{std::move(name), n, err, tol, err <= tol};
}

// Stride away from 1 and from the top of the box.
double random_stride(Rng& rng, std::size_t extent) {
  const double hi = std::min(4.0, static_cast<double>(extent) - 0.05);
  return hi <= 1.0 ? 1.0 : uniform(rng, 1.0, hi);
}

struct DiffStrideInstance {
  RealTensor x;
  RealTensor w;  // readout weights on the output
  layer::StrideParams params;
  double smoothness = 4.0;
  masking::TargetShape base;
};

DiffStrideInstance diffstride_instance(Rng& rng, std::size_t index) {
  DiffStrideInstance inst;
  Shape3 shape;
  double sh = 0.0;
  double sw = 0.0;
  if (index == 0) {
    shape = Shape3{32, 32, 2};
    sh = 2.6;
    sw = 3.1;
    inst.smoothness = 4.0;
  } else {
    shape = Shape3{uniform_size(rng, 4, 24), uniform_size(rng, 4, 24), uniform_size(rng, 1, 3)};
    sh = random_stride(rng, shape.height);
    sw = random_stride(rng, shape.width);
    inst.smoothness = uniform(rng, 1.0, 4.0);
  }
  inst.x = random_tensor(rng, shape);
  inst.params = layer::StrideParams(sh, sw, shape.height, shape.width);
  inst.base = layer::diffstride_forward(inst.x, inst.params, inst.smoothness).context.output;
  inst.w = random_tensor(rng, Shape3{inst.base.height, inst.base.width, shape.channels});
  return inst;
}

// L(y) = <w, y> + 0.5 |y|^2, so dL/dy = w + y.
double readout_loss(const RealTensor& y, const RealTensor& w) {
  return dot(y.data(), w.data()) + 0.5 * y.squared_norm();
}

RealTensor readout_grad(const RealTensor& y, const RealTensor& w) {
  RealTensor g = w;
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += y.data()[i];
  return g;
}

}  // namespace

GradcheckConfig parse_gradcheck_config(const nlohmann::json& j) {
  GradcheckConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      c.seed = value.get<std::uint64_t>();
    } else if (key == "instances") {
      c.instances = value.get<std::size_t>();
    } else if (key == "step") {
      c.step = value.get<double>();
    } else {
      throw std::invalid_argument("gradcheck config: unknown key '" + key + "'");
    }
  }
  if (c.instances == 0 || !(c.step > 0.0)) {
    throw std::invalid_argument("gradcheck config: need instances > 0 and step > 0");
  }
  return c;
}

bool GradcheckReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const GradcheckRow& r) { return r.pass; });
}

std::string GradcheckReport::table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-26s %9s %13s %11s  %s\n", "check", "instances",
                "max_rel_err", "tolerance", "status");
  out += line;
  for (const GradcheckRow& r : rows) {
    std::snprintf(line, sizeof(line), "%-26s %9zu %13.3e %11.1e  %s\n", r.check.c_str(),
                  r.instances, r.max_rel_error, r.tolerance, r.pass ? "PASS" : "FAIL");
    out += line;
  }
  return out;
}

double relative_error(std::span<const double> analytic, std::span<const double> numeric,
                      double floor) {
  if (analytic.size() != numeric.size()) {
    throw std::invalid_argument("relative_error: size mismatch");
  }
  double diff = 0.0;
  double scale = floor;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return diff / scale;
}

GradcheckRow check_spectrum_forward(const GradcheckConfig& c) {
  Rng rng(c.seed ^ 0x11);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.instances; ++k) {
    const Shape3 shape{uniform_size(rng, 1, 12), uniform_size(rng, 1, 12), uniform_size(rng, 1, 2)};
    RealTensor x = random_tensor(rng, shape);
    spectrum::HalfSpectrum g = spectrum::forward(random_tensor(rng, shape));
    for (Complex& v : g.data()) v = Complex(v.real() + 0.3, v.imag() - 0.2);
    const auto f = [&] { return spectrum::plain_inner(spectrum::forward(x), g); };
    const std::vector<double> numeric = numeric_gradient(x.data(), c.step, f);
    const RealTensor analytic = spectrum::vjp_forward(g);
    worst = std::max(worst, relative_error(analytic.data(), numeric));
  }
  return make_row("spectrum.forward", c.instances, worst, 1e-8);
}

GradcheckRow check_spectrum_inverse(const GradcheckConfig& c) {
  Rng rng(c.seed ^ 0x12);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.instances; ++k) {
    const Shape3 shape{uniform_size(rng, 1, 12), uniform_size(rng, 1, 12), uniform_size(rng, 1, 2)};
    spectrum::HalfSpectrum y = spectrum::forward(random_tensor(rng, shape));
    const RealTensor g = random_tensor(rng, shape);
    // Real and imaginary parts of every stored coefficient as one flat vector.
    std::vector<double> flat;
    for (const Complex& v : y.data()) {
      flat.push_back(v.real());
      flat.push_back(v.imag());
    }
    const auto f = [&] {
      for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = Complex(flat[2 * i], flat[2 * i + 1]);
      return dot(spectrum::synthesize(y).data(), g.data());
    };
    const std::vector<double> numeric = numeric_gradient(flat, c.step, f);
    const spectrum::HalfSpectrum analytic = spectrum::vjp_inverse(g);
    std::vector<double> a;
    for (const Complex& v : analytic.data()) {
      a.push_back(v.real());
      a.push_back(v.imag());
    }
    worst = std::max(worst, relative_error(a, numeric));
  }
  return make_row("spectrum.inverse", c.instances, worst, 1e-8);
}

GradcheckRow check_mask_derivatives(const GradcheckConfig& c) {
  Rng rng(c.seed ^ 0x13);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.instances; ++k) {
    masking::MaskSpec spec;
    spec.height = uniform_size(rng, 2, 40);
    spec.width = uniform_size(rng, 2, 40);
    spec.smoothness = uniform(rng, 0.5, 6.0);
    spec.stride_h = random_stride(rng, spec.height);
    spec.stride_w = random_stride(rng, spec.width);
    const masking::MaskDerivatives d = masking::dmask_dstride(spec);

    const auto compare = [&](double& stride, const std::vector<double>& analytic,
                             std::vector<double> (*window)(const masking::MaskSpec&)) {
      const double s = stride;
      stride = s + c.step;
      const std::vector<double> up = window(spec);
      stride = s - c.step;
      const std::vector<double> down = window(spec);
      stride = s;
      const std::vector<double> mid = window(spec);
      std::vector<double> a;
      std::vector<double> n;
      for (std::size_t i = 0; i < mid.size(); ++i) {
        // Skip bins whose clip state changes inside the stencil.
        const auto inside = [](double m) { return m > 0.0 && m < 1.0; };
        if (inside(up[i]) != inside(mid[i]) || inside(down[i]) != inside(mid[i])) continue;
        a.push_back(analytic[i]);
        n.push_back((up[i] - down[i]) / (2.0 * c.step));
      }
      worst = std::max(worst, relative_error(a, n));
    };
    compare(spec.stride_h, d.d_vertical, masking::mask_h);
    compare(spec.stride_w, d.d_horizontal, masking::mask_w);
  }
  return make_row("masking.dmask_dstride", c.instances, worst, 1e-6);
}

GradcheckRow check_diffstride_strides(const GradcheckConfig& c) {
  Rng rng(c.seed ^ 0x14);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.instances; ++k) {
    DiffStrideInstance inst = diffstride_instance(rng, k);
    auto fwd = layer::diffstride_forward(inst.x, inst.params, inst.smoothness);
    const layer::DiffStrideGrads grads =
        layer::diffstride_vjp(readout_grad(fwd.output, inst.w), fwd.context);

    layer::StrideParams p = inst.params;
    double strides[2] = {p.s_h, p.s_w};
    const auto f = [&] {
      p.s_h = strides[0];
      p.s_w = strides[1];
      return readout_loss(layer::diffstride_forward(inst.x, p, inst.smoothness, inst.base).output,
                          inst.w);
    };
    const std::vector<double> numeric = numeric_gradient(strides, c.step, f);
    const double analytic[2] = {grads.stride_h, grads.stride_w};
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  return make_row("diffstride.strides", c.instances, worst, 1e-5);
}

GradcheckRow check_diffstride_input(const GradcheckConfig& c) {
  Rng rng(c.seed ^ 0x15);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.instances; ++k) {
    DiffStrideInstance inst = diffstride_instance(rng, k == 0 ? 1 : k);
    auto fwd = layer::diffstride_forward(inst.x, inst.params, inst.smoothness);
    const layer::DiffStrideGrads grads =
        layer::diffstride_vjp(readout_grad(fwd.output, inst.w), fwd.context);
    RealTensor x = inst.x;
    const auto f = [&] {
      return readout_loss(layer::diffstride_forward(x, inst.params, inst.smoothness).output,
                          inst.w);
    };
    const std::vector<double> numeric = numeric_gradient(x.data(), c.step, f);
    worst = std::max(worst, relative_error(grads.input.data(), numeric));
  }
  return make_row("diffstride.input", c.instances, worst, 1e-6);
}

GradcheckRow check_regularizer(const GradcheckConfig& c) {
  Rng rng(c.seed ^ 0x16);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.instances; ++k) {
    regularizer::StrideStack stack;
    const std::size_t layers = uniform_size(rng, 1, 5);
    for (std::size_t l = 0; l < layers; ++l) {
      stack.strides.emplace_back(uniform(rng, 1.0, 3.0), uniform(rng, 1.0, 3.0));
    }
    std::vector<double> flat;
    for (const auto& [sh, sw] : stack.strides) {
      flat.push_back(sh);
      flat.push_back(sw);
    }
    const auto f = [&] {
      regularizer::StrideStack s;
      for (std::size_t l = 0; l < layers; ++l) s.strides.emplace_back(flat[2 * l], flat[2 * l + 1]);
      return regularizer::j_value(s);
    };
    const std::vector<double> numeric = numeric_gradient(flat, c.step, f);
    std::vector<double> analytic;
    for (const auto& [gh, gw] : regularizer::j_gradient(stack)) {
      analytic.push_back(gh);
      analytic.push_back(gw);
    }
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  return make_row("regularizer.j", c.instances, worst, 1e-8);
}

GradcheckRow check_conv2d(const GradcheckConfig& c) {
  Rng rng(c.seed ^ 0x17);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.instances; ++k) {
    const std::size_t kh = 2 * uniform_size(rng, 0, 2) + 1;
    const std::size_t kw = 2 * uniform_size(rng, 0, 2) + 1;
    const nn::ConvShape ks{kh, kw, uniform_size(rng, 1, 3), uniform_size(rng, 1, 3)};
    RealTensor x = random_tensor(rng, Shape3{uniform_size(rng, 1, 8), uniform_size(rng, 1, 8), ks.cin});
    std::vector<double> kernel = random_vector(rng, ks.size());
    std::vector<double> bias = random_vector(rng, ks.cout);
    const RealTensor w = random_tensor(rng, Shape3{x.height(), x.width(), ks.cout});
    const auto f = [&] { return dot(nn::conv2d(x, kernel, ks, bias).data(), w.data()); };

    std::vector<double> grad_kernel(ks.size(), 0.0);
    std::vector<double> grad_bias(ks.cout, 0.0);
    const RealTensor grad_x = nn::conv2d_backward(w, x, kernel, ks, grad_kernel, grad_bias);
    worst = std::max(worst, relative_error(grad_x.data(), numeric_gradient(x.data(), c.step, f)));
    worst = std::max(worst, relative_error(grad_kernel, numeric_gradient(kernel, c.step, f)));
    worst = std::max(worst, relative_error(grad_bias, numeric_gradient(bias, c.step, f)));
  }
  return make_row("nn.conv2d", c.instances, worst, 1e-6);
}

GradcheckRow check_residual_block(const GradcheckConfig& c) {
  Rng rng(c.seed ^ 0x18);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.instances; ++k) {
    const std::size_t cin = uniform_size(rng, 1, 3);
    const std::size_t cout = uniform_size(rng, 1, 3);
    const Shape3 shape{uniform_size(rng, 6, 16), uniform_size(rng, 6, 16), cin};
    layer::ResidualBlockWeights weights;
    weights.main = nn::Parameter{"main", {3, 3, cin, cout}, random_vector(rng, 9 * cin * cout, 0.5)};
    weights.skip = nn::Parameter{"skip", {1, 1, cin, cout}, random_vector(rng, cin * cout, 0.5)};
    const double s = random_stride(rng, std::min(shape.height, shape.width));
    const layer::StrideParams params(s, s, shape.height, shape.width, true);
    const double smoothness = uniform(rng, 1.0, 4.0);
    const RealTensor x = random_tensor(rng, shape);
    const RealTensor out = layer::residual_block_forward(x, weights, params, smoothness).output;
    const RealTensor w = random_tensor(rng, out.shape());

    nn::Tape tape;
    std::vector<double> grad_main(weights.main.size(), 0.0);
    std::vector<double> grad_skip(weights.skip.size(), 0.0);
    std::pair<double, double> grad_strides{0.0, 0.0};
    const nn::Var y = layer::residual_block(tape, tape.leaf(x), weights, params, smoothness,
                                            grad_main, grad_skip, &grad_strides);
    const nn::Var loss = tape.record(
        RealTensor(Shape3{1, 1, 1}, dot(tape.value(y).data(), w.data())),
        [y, &w](nn::Tape& t, const RealTensor& g) {
          RealTensor gy = w;
          for (double& v : gy.data()) v *= g.data()[0];
          t.accumulate(y, gy);
        });
    tape.backward(loss);

    const auto f = [&] {
      return dot(layer::residual_block_forward(x, weights, params, smoothness).output.data(),
                 w.data());
    };
    worst = std::max(worst,
                     relative_error(grad_main, numeric_gradient(weights.main.value, c.step, f)));
    worst = std::max(worst,
                     relative_error(grad_skip, numeric_gradient(weights.skip.value, c.step, f)));
  }
  return make_row("layer.residual_block", c.instances, worst, 1e-5);
}

GradcheckRow check_network(const GradcheckConfig& c, nn::GlobalPool pool) {
  Rng rng(c.seed ^ (pool == nn::GlobalPool::kAvg ? 0x19 : 0x1a));
  const auto global_pool = [pool](const RealTensor& t) {
    std::vector<std::size_t> argmax;
    return pool == nn::GlobalPool::kAvg ? nn::global_avg_pool(t) : nn::global_max_pool(t, argmax);
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < c.instances; ++k) {
    const std::size_t cin = uniform_size(rng, 1, 2);
    const std::size_t hidden = uniform_size(rng, 2, 4);
    const std::size_t classes = uniform_size(rng, 2, 4);
    const Shape3 shape{uniform_size(rng, 6, 16), uniform_size(rng, 6, 16), cin};
    std::vector<nn::Parameter> params{
        nn::Parameter{"conv.kernel", {3, 3, cin, hidden}, random_vector(rng, 9 * cin * hidden, 0.5)},
        nn::Parameter{"conv.bias", {hidden}, random_vector(rng, hidden, 0.1), false},
        nn::Parameter{"dense.weight", {hidden, classes}, random_vector(rng, hidden * classes)},
        nn::Parameter{"dense.bias", {classes}, random_vector(rng, classes, 0.1), false},
    };
    layer::StrideParams strides(random_stride(rng, shape.height), random_stride(rng, shape.width),
                                shape.height, shape.width);
    const double smoothness = uniform(rng, 1.0, 4.0);
    const RealTensor x = random_tensor(rng, shape);
    const std::size_t label = uniform_size(rng, 0, classes - 1);
    const nn::ConvShape ks = nn::conv_shape(params[0]);

    // Forward with the crop pinned to `base`, shared by the oracle.
    masking::TargetShape base;
    const auto loss_at = [&](const layer::StrideParams& s,
                             std::optional<masking::TargetShape> pinned) {
      RealTensor h = nn::relu(nn::conv2d(x, params[0].value, ks, params[1].value));
      auto ds = layer::diffstride_forward(h, s, smoothness, pinned);
      if (!pinned) base = ds.context.output;
      h = global_pool(ds.output);
      h = nn::dense(h, params[2].value, params[3].value, classes);
      return nn::softmax_cross_entropy(h, label);
    };
    loss_at(strides, std::nullopt);

    nn::Gradients grads = nn::Gradients::like(params, 1);
    nn::Tape tape;
    nn::Var h = nn::conv2d(tape, tape.leaf(x), params[0], &params[1], grads.params[0],
                           grads.params[1]);
    h = nn::relu(tape, h);
    h = nn::diffstride(tape, h, strides, smoothness, &grads.strides[0]);
    h = pool == nn::GlobalPool::kAvg ? nn::global_avg_pool(tape, h) : nn::global_max_pool(tape, h);
    h = nn::dense(tape, h, params[2], params[3], grads.params[2], grads.params[3]);
    tape.backward(nn::softmax_cross_entropy(tape, h, label));

    const auto f = [&] { return loss_at(strides, base); };
    for (std::size_t i = 0; i < params.size(); ++i) {
      worst = std::max(worst, relative_error(grads.params[i],
                                             numeric_gradient(params[i].value, c.step, f)));
    }
    double s[2] = {strides.s_h, strides.s_w};
    const auto fs = [&] {
      layer::StrideParams p = strides;
      p.s_h = s[0];
      p.s_w = s[1];
      return loss_at(p, base);
    };
    const double analytic[2] = {grads.strides[0].first, grads.strides[0].second};
    // Average pooling reads only the DC bin, which the window never touches,
    // so the stride gradient vanishes there; the floor keeps rounding noise
    // from counting as relative error.
    worst = std::max(worst, relative_error(analytic, numeric_gradient(s, c.step, fs), 1e-5));
  }
  return make_row(std::string("nn.network.") + nn::to_string(pool), c.instances, worst, 1e-4);
}

GradcheckReport run_gradcheck(const GradcheckConfig& config) {
  GradcheckReport report;
  report.rows.push_back(check_spectrum_forward(config));
  report.rows.push_back(check_spectrum_inverse(config));
  report.rows.push_back(check_mask_derivatives(config));
  report.rows.push_back(check_diffstride_strides(config));
  report.rows.push_back(check_diffstride_input(config));
  report.rows.push_back(check_regularizer(config));
  report.rows.push_back(check_conv2d(config));
  report.rows.push_back(check_residual_block(config));
  report.rows.push_back(check_network(config, nn::GlobalPool::kAvg));
  report.rows.push_back(check_network(config, nn::GlobalPool::kMax));
  return report;
}

}  // namespace diffstride::harness
