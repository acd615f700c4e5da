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

#include "diffstride/harness/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "diffstride/layer.hpp"
#include "diffstride/nn/ops.hpp"

namespace diffstride::harness {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Returns a value derived from the output so the work cannot be elided.
double run_once(nn::DownsampleKind kind, const RealTensor& x, std::pair<double, double> s,
                double smoothness, bool backward) {
  switch (kind) {
    case nn::DownsampleKind::kStrided: {
      const auto sh = static_cast<std::size_t>(std::lround(s.first));
      const auto sw = static_cast<std::size_t>(std::lround(s.second));
      RealTensor y = nn::strided_subsample(x, sh, sw);
      if (!backward) return y.data()[0];
      return nn::strided_subsample_backward(y, x.shape(), sh, sw).data()[0];
    }
    case nn::DownsampleKind::kSpectral: {
      RealTensor y = layer::spectral_pool(x, s);
      if (!backward) return y.data()[0];
      return layer::spectral_pool_vjp(y, x.shape()).data()[0];
    }
    case nn::DownsampleKind::kDiffStride: {
      const layer::StrideParams p(s.first, s.second, x.height(), x.width());
      auto r = layer::diffstride_forward(x, p, smoothness);
      if (!backward) return r.output.data()[0];
      const layer::DiffStrideGrads g = layer::diffstride_vjp(r.output, r.context);
      return g.input.data()[0] + g.stride_h;
    }
  }
  return 0.0;
}

}  // namespace

BenchConfig parse_bench_config(const nlohmann::json& j) {
  BenchConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "sizes") {
      c.sizes.clear();
      for (const auto& s : value) {
        c.sizes.push_back(Shape3{s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(),
                                 s.at(2).get<std::size_t>()});
      }
    } else if (key == "kinds") {
      c.kinds.clear();
      for (const auto& k : value) c.kinds.push_back(nn::parse_downsample_kind(k.get<std::string>()));
    } else if (key == "strides") {
      c.strides = {value.at(0).get<double>(), value.at(1).get<double>()};
    } else if (key == "R") {
      c.smoothness = value.get<double>();
    } else if (key == "reps") {
      c.reps = value.get<std::size_t>();
    } else if (key == "seed") {
      c.seed = value.get<std::uint64_t>();
    } else {
      throw std::invalid_argument("bench config: unknown key '" + key + "'");
    }
  }
  if (c.reps < 30) throw std::invalid_argument("bench config: reps must be >= 30");
  return c;
}

std::string bench_header() { return "kind,height,width,channels,s_h,s_w,pass,reps,median_us,min_us"; }

std::string format_bench_row(const BenchRow& r, std::pair<double, double> s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%zu,%zu,%zu,%g,%g,%s,%zu,%.3f,%.3f", r.kind.c_str(),
                r.size.height, r.size.width, r.size.channels, s.first, s.second, r.pass.c_str(),
                r.reps, r.median_us, r.min_us);
  return buf;
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  if (config.reps < 30) throw std::invalid_argument("run_bench: reps must be >= 30");
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<BenchRow> rows;
  volatile double sink = 0.0;
  for (const Shape3& size : config.sizes) {
    RealTensor x(size);
    for (double& v : x.data()) v = normal(rng);
    for (nn::DownsampleKind kind : config.kinds) {
      for (bool backward : {false, true}) {
        std::vector<double> times;
        times.reserve(config.reps);
        sink = sink + run_once(kind, x, config.strides, config.smoothness, backward);  // warm-up
        for (std::size_t i = 0; i < config.reps; ++i) {
          const auto t0 = Clock::now();
          sink = sink + run_once(kind, x, config.strides, config.smoothness, backward);
          times.push_back(std::chrono::duration<double, std::micro>(Clock::now() - t0).count());
        }
        BenchRow row;
        row.kind = nn::to_string(kind);
        row.size = size;
        row.pass = backward ? "forward_backward" : "forward";
        row.reps = config.reps;
        row.median_us = median(times);
        row.min_us = *std::min_element(times.begin(), times.end());
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace diffstride::harness
