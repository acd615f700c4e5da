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

#include <random>

#include <benchmark/benchmark.h>

#include "diffstride/layer.hpp"
#include "diffstride/nn/ops.hpp"
#include "diffstride/spectrum.hpp"

namespace {

using namespace diffstride;

RealTensor random_input(std::size_t size, std::size_t channels) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  RealTensor x(Shape3{size, size, channels});
  for (double& v : x.data()) v = normal(rng);
  return x;
}

void BM_SpectrumRoundTrip(benchmark::State& state) {
  const RealTensor x = random_input(static_cast<std::size_t>(state.range(0)), 8);
  for (auto _ : state) {
    RealTensor y = spectrum::inverse(spectrum::forward(x));
    benchmark::DoNotOptimize(y.data().data());
  }
}
BENCHMARK(BM_SpectrumRoundTrip)->Arg(16)->Arg(31)->Arg(32)->Arg(64);

void BM_DiffStrideForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RealTensor x = random_input(n, 8);
  const layer::StrideParams p(2.0, 2.0, n, n);
  for (auto _ : state) {
    auto r = layer::diffstride_forward(x, p, 4.0);
    benchmark::DoNotOptimize(r.output.data().data());
  }
}
BENCHMARK(BM_DiffStrideForward)->Arg(16)->Arg(32)->Arg(64);

void BM_DiffStrideForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RealTensor x = random_input(n, 8);
  const layer::StrideParams p(2.0, 2.0, n, n);
  for (auto _ : state) {
    auto r = layer::diffstride_forward(x, p, 4.0);
    layer::DiffStrideGrads g = layer::diffstride_vjp(r.output, r.context);
    benchmark::DoNotOptimize(g.input.data().data());
  }
}
BENCHMARK(BM_DiffStrideForwardBackward)->Arg(16)->Arg(32)->Arg(64);

void BM_SpectralPool(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RealTensor x = random_input(n, 8);
  for (auto _ : state) {
    RealTensor y = layer::spectral_pool(x, {2.0, 2.0});
    benchmark::DoNotOptimize(y.data().data());
  }
}
BENCHMARK(BM_SpectralPool)->Arg(16)->Arg(32)->Arg(64);

void BM_StridedSubsample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RealTensor x = random_input(n, 8);
  for (auto _ : state) {
    RealTensor y = nn::strided_subsample(x, 2, 2);
    benchmark::DoNotOptimize(y.data().data());
  }
}
BENCHMARK(BM_StridedSubsample)->Arg(16)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
