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

#include <bit>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "diffstride/nn/checkpoint.hpp"
#include "diffstride/nn/model.hpp"
#include "diffstride/nn/ops.hpp"
#include "diffstride/nn/optim.hpp"
#include "diffstride/nn/tape.hpp"
#include "oracles.hpp"

using namespace diffstride;
using namespace diffstride::nn;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> randv(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST(Conv2d, OneByOneIdentity) {
  std::mt19937_64 rng(51);
  const RealTensor x = oracle::random_tensor(rng, Shape3{5, 4, 2});
  const std::vector<double> k{1, 0, 0, 1};
  const RealTensor y = conv2d(x, k, ConvShape{1, 1, 2, 2});
  EXPECT_EQ(oracle::max_abs_diff(y.data(), x.data()), 0.0);
}

TEST(Conv2d, OnesKernelSpreadsOneHot) {
  RealTensor x(Shape3{5, 5, 1});
  x(2, 2, 0) = 1.0;
  const RealTensor y = conv2d(x, std::vector<double>(9, 1.0), ConvShape{3, 3, 1, 1});
  for (std::size_t h = 0; h < 5; ++h)
    for (std::size_t w = 0; w < 5; ++w)
      EXPECT_EQ(y(h, w, 0), (h >= 1 && h <= 3 && w >= 1 && w <= 3) ? 1.0 : 0.0);
}

TEST(Conv2d, MatchesDirectSumAndFiniteDifferences) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 15; ++trial) {
    const ConvShape ks{1 + 2 * static_cast<std::size_t>(trial % 3), 1 + 2 * static_cast<std::size_t>((trial / 3) % 2),
                       1 + static_cast<std::size_t>(trial % 2), 2};
    RealTensor x = oracle::random_tensor(rng, Shape3{6, 7, ks.cin});
    std::vector<double> k = randv(rng, ks.size());
    const RealTensor y = conv2d(x, k, ks);
    const RealTensor ref = oracle::conv_same(x, k, ks.kh, ks.kw, ks.cout);
    EXPECT_LT(oracle::max_abs_diff(y.data(), ref.data()), 1e-12);

    const RealTensor g = oracle::random_tensor(rng, y.shape());
    std::vector<double> gk(ks.size(), 0.0);
    const RealTensor gx = conv2d_backward(g, x, k, ks, gk);
    const auto f = [&] { return dot(conv2d(x, k, ks).data(), g.data()); };
    const auto nx = oracle::central_diff(x.data(), 1e-6, f);
    const auto nk = oracle::central_diff(k, 1e-6, f);
    EXPECT_LT(oracle::max_abs_diff(gx.data(), nx), 1e-6 * oracle::max_abs(nx));
    EXPECT_LT(oracle::max_abs_diff(gk, nk), 1e-6 * oracle::max_abs(nk));
  }
}

TEST(Conv2d, RejectsBadShapes) {
  const RealTensor x(Shape3{4, 4, 2});
  EXPECT_THROW(conv2d(x, std::vector<double>(8, 0.0), ConvShape{2, 2, 2, 1}), std::invalid_argument);
  EXPECT_THROW(conv2d(x, std::vector<double>(9, 0.0), ConvShape{3, 3, 1, 1}), std::invalid_argument);
}

TEST(Ops, ReluAndPools) {
  RealTensor x(Shape3{1, 2, 1}, std::vector<double>{-1.0, 2.0});
  const RealTensor r = relu(x);
  EXPECT_EQ(r.data()[0], 0.0);
  EXPECT_EQ(r.data()[1], 2.0);

  RealTensor t(Shape3{2, 2, 1}, std::vector<double>{3.0, 1.0, 3.0, 2.0});
  std::vector<std::size_t> argmax;
  EXPECT_EQ(global_max_pool(t, argmax).data()[0], 3.0);
  EXPECT_EQ(argmax[0], 0u);  // first of the tied maxima
  const RealTensor g = global_max_pool_backward(RealTensor(Shape3{1, 1, 1}, 1.0), t.shape(), argmax);
  EXPECT_EQ(g.data()[0], 1.0);
  EXPECT_EQ(g.data()[2], 0.0);
  EXPECT_DOUBLE_EQ(global_avg_pool(t).data()[0], 2.25);
}

TEST(Ops, SoftmaxCrossEntropy) {
  for (std::size_t k : {2u, 3u, 10u}) {
    EXPECT_NEAR(softmax_cross_entropy(RealTensor(Shape3{1, 1, k}, 0.7), 0), std::log(double(k)), 1e-14);
  }
  RealTensor big(Shape3{1, 1, 3}, std::vector<double>{1000.0, 0.0, -1000.0});
  RealTensor grad;
  EXPECT_NEAR(softmax_cross_entropy(big, 0, &grad), 0.0, 1e-12);
  EXPECT_TRUE(grad.all_finite());
  EXPECT_THROW(softmax_cross_entropy(big, 3), std::invalid_argument);
}

TEST(Ops, LayerGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(53);
  RealTensor x = oracle::random_tensor(rng, Shape3{3, 4, 3});
  std::vector<double> w = randv(rng, 3 * 4), b = randv(rng, 4);
  const std::size_t label = 2;
  // relu -> avg pool -> dense -> CE, and max pool variant.
  for (bool use_max : {false, true}) {
    const auto loss = [&] {
      std::vector<std::size_t> am;
      RealTensor h = relu(x);
      h = use_max ? global_max_pool(h, am) : global_avg_pool(h);
      return softmax_cross_entropy(dense(h, w, b, 4), label);
    };
    Tape tape;
    std::vector<double> gw(w.size(), 0.0), gb(b.size(), 0.0);
    Parameter pw{"w", {3, 4}, w}, pb{"b", {4}, b, false};
    Var v = tape.leaf(x);
    Var h = nn::relu(tape, v);
    h = use_max ? nn::global_max_pool(tape, h) : nn::global_avg_pool(tape, h);
    h = nn::dense(tape, h, pw, pb, gw, gb);
    tape.backward(nn::softmax_cross_entropy(tape, h, label));
    const auto nx = oracle::central_diff(x.data(), 1e-6, loss);
    const auto nw = oracle::central_diff(w, 1e-6, loss);
    const auto nb = oracle::central_diff(b, 1e-6, loss);
    EXPECT_LT(oracle::max_abs_diff(tape.grad(v).data(), nx), 1e-8);
    EXPECT_LT(oracle::max_abs_diff(gw, nw), 1e-8);
    EXPECT_LT(oracle::max_abs_diff(gb, nb), 1e-8);
  }
}

TEST(Tape, FanOutAccumulatesAndBackwardRunsOnce) {
  Tape tape;
  const Var a = tape.leaf(RealTensor(Shape3{1, 1, 1}, 3.0));
  const Var s = nn::add(tape, a, a);
  const Var r = nn::relu(tape, s);
  tape.backward(r, 2.0);
  EXPECT_EQ(tape.grad(a).data()[0], 4.0);
  EXPECT_THROW(tape.backward(r), std::logic_error);
  EXPECT_THROW(tape.leaf(RealTensor(Shape3{1, 1, 1})), std::logic_error);
}

TEST(Tape, RejectsNonScalarRoot) {
  Tape tape;
  const Var a = tape.leaf(RealTensor(Shape3{2, 1, 1}, 1.0));
  EXPECT_THROW(tape.backward(a), std::invalid_argument);
}

TEST(Optim, PlainSgdStep) {
  std::vector<double> p{1.0, -2.0}, g{0.5, 0.25}, v{0.0, 0.0};
  sgd_momentum_step(p, g, v, 0.1, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(p[0], 0.95);
  EXPECT_DOUBLE_EQ(p[1], -2.025);
}

TEST(Optim, MomentumTwoStepsOnConstantGradient) {
  std::vector<double> p{0.0}, g{1.0}, v{0.0};
  sgd_momentum_step(p, g, v, 0.1, 0.9, 0.0);
  sgd_momentum_step(p, g, v, 0.1, 0.9, 0.0);
  EXPECT_NEAR(p[0], -0.1 * (1.0 + 1.9), 1e-15);
}

TEST(Optim, AdamFirstStepMovesByLearningRate) {
  std::vector<double> p{1.0, 1.0}, g{3.0, -1e-3}, m(2, 0.0), v(2, 0.0);
  adam_step(p, g, m, v, 1, 0.01, 0.9, 0.999, 1e-12);
  EXPECT_NEAR(p[0], 0.99, 1e-9);
  EXPECT_NEAR(p[1], 1.01, 1e-6);
  EXPECT_THROW(adam_step(p, g, m, v, 0, 0.01, 0.9, 0.999, 1e-8), std::invalid_argument);
}

TEST(Optim, WeightDecaySkipsBiasesAndStrides) {
  std::vector<Parameter> params{Parameter{"w", {1}, {1.0}, true}, Parameter{"b", {1}, {1.0}, false}};
  OptimizerConfig c;
  c.name = "sgd";
  c.lr = 0.1;
  c.momentum = 0.0;
  c.weight_decay = 0.5;
  Optimizer opt(c, params, 1);
  std::vector<layer::StrideParams> strides{layer::StrideParams(2.0, 2.0, 16, 16)};
  opt.step(params, std::vector<std::vector<double>>{{0.0}, {0.0}}, strides, true);
  EXPECT_DOUBLE_EQ(params[0].value[0], 0.95);
  EXPECT_DOUBLE_EQ(params[1].value[0], 1.0);
  EXPECT_DOUBLE_EQ(strides[0].s_h, 2.0);
}

TEST(Optim, StrideAtBoxEdgeWithOutwardGradientStays) {
  std::vector<Parameter> params;
  OptimizerConfig c;
  c.name = "sgd";
  c.lr = 0.5;
  c.momentum = 0.0;
  Optimizer opt(c, params, 1);
  std::vector<layer::StrideParams> strides{layer::StrideParams(1.0, 2.0, 16, 16)};
  strides[0].grad_h = 3.0;  // pushes s_h below 1
  opt.step(params, {}, strides, true);
  EXPECT_EQ(strides[0].s_h, 1.0);
  EXPECT_EQ(strides[0].s_w, 2.0);
}

TEST(Optim, StrideLearningRateScale) {
  std::vector<Parameter> params;
  OptimizerConfig c;
  c.name = "sgd";
  c.lr = 0.1;
  c.momentum = 0.0;
  c.stride_lr_scale = 0.5;
  Optimizer opt(c, params, 1);
  std::vector<layer::StrideParams> strides{layer::StrideParams(2.0, 2.0, 16, 16)};
  strides[0].grad_h = -1.0;
  opt.step(params, {}, strides, true);
  EXPECT_DOUBLE_EQ(strides[0].s_h, 2.05);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = std::filesystem::temp_directory_path() / "diffstride_ckpt_test";
  std::filesystem::create_directories(dir);
  std::vector<NamedArray> arrays{
      {"a", {2, 3}, {1.0, -0.0, 1e-310, std::numeric_limits<double>::max(), M_PI, -1.5}},
      {"b", {1}, {std::numeric_limits<double>::infinity()}},
      {"empty", {0}, {}},
  };
  save_checkpoint(dir / "ck", arrays);
  const auto back = load_checkpoint(dir / "ck");
  ASSERT_EQ(back.size(), arrays.size());
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    EXPECT_EQ(back[i].name, arrays[i].name);
    EXPECT_EQ(back[i].shape, arrays[i].shape);
    ASSERT_EQ(back[i].data.size(), arrays[i].data.size());
    for (std::size_t j = 0; j < arrays[i].data.size(); ++j) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i].data[j]),
                std::bit_cast<std::uint64_t>(arrays[i].data[j]));
    }
  }
  EXPECT_THROW(save_checkpoint(dir / "bad", {{"x", {2}, {1.0}}}), std::invalid_argument);
  EXPECT_THROW(load_checkpoint(dir / "missing"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(Model, ParameterLayoutAndStrideBoxes) {
  ModelSpec spec;
  const Model m(spec, 3);
  ASSERT_EQ(m.params().size(), 6u);
  EXPECT_EQ(m.params()[0].name, "conv1.kernel");
  EXPECT_EQ(m.params()[0].shape, (std::vector<std::size_t>{3, 3, 1, 8}));
  EXPECT_FALSE(m.params()[1].decay);
  EXPECT_EQ(m.params()[4].name, "dense.weight");
  EXPECT_EQ(m.strides()[0].bound_h, 16u);
  EXPECT_EQ(m.strides()[1].bound_h, 16u);  // floor(16/2 + 8) clipped to 16
}

TEST(Model, RejectsInfeasibleStrideInit) {
  ModelSpec spec;
  spec.stride_init = {{3.0, 3.0}, {6.0, 6.0}};
  spec.kind = DownsampleKind::kSpectral;  // first layer leaves 5x5
  EXPECT_THROW(Model(spec, 0), std::invalid_argument);
}

TEST(Model, GradientsMatchFiniteDifferencesForEveryKind) {
  std::mt19937_64 rng(54);
  const RealTensor x = oracle::random_tensor(rng, Shape3{12, 12, 1});
  for (DownsampleKind kind : {DownsampleKind::kStrided, DownsampleKind::kSpectral, DownsampleKind::kDiffStride}) {
    ModelSpec spec;
    spec.input_height = spec.input_width = 12;
    spec.channels = {3, 4};
    spec.kind = kind;
    spec.pool = GlobalPool::kMax;
    Model m(spec, 7);
    Gradients g = Gradients::like(m.params(), 2);
    m.loss_and_grad(x, 1, g);
    for (std::size_t i = 0; i < m.params().size(); ++i) {
      auto& v = m.params()[i].value;
      const auto numeric = oracle::central_diff(v, 1e-6, [&] {
        Gradients scratch = Gradients::like(m.params(), 2);
        return m.loss_and_grad(x, 1, scratch).loss;
      });
      EXPECT_LT(oracle::max_abs_diff(g.params[i], numeric), 1e-6 * std::max(1.0, oracle::max_abs(numeric)))
          << to_string(kind) << " " << m.params()[i].name;
    }
  }
}

TEST(Model, ArraysRoundTrip) {
  Model a(ModelSpec{}, 1);
  a.strides()[0].s_h = 1.75;
  Model b(ModelSpec{}, 2);
  b.load_arrays(a.to_arrays());
  EXPECT_EQ(b.params()[0].value, a.params()[0].value);
  EXPECT_EQ(b.strides()[0].s_h, 1.75);
  auto arrays = a.to_arrays();
  arrays.pop_back();
  EXPECT_THROW(b.load_arrays(arrays), std::invalid_argument);
}

TEST(Model, ParseKinds) {
  EXPECT_EQ(parse_downsample_kind("spectral-pool"), DownsampleKind::kSpectral);
  EXPECT_EQ(parse_downsample_kind("strided-crop-baseline"), DownsampleKind::kStrided);
  EXPECT_THROW(parse_downsample_kind("avgpool"), std::invalid_argument);
}
