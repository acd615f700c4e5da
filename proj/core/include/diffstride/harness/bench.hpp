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
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffstride/nn/model.hpp"
#include "diffstride/tensor.hpp"

namespace diffstride::harness {

struct BenchConfig {
  std::vector<Shape3> sizes{{32, 32, 8}, {64, 64, 8}};
  std::vector<nn::DownsampleKind> kinds{nn::DownsampleKind::kStrided,
                                        nn::DownsampleKind::kSpectral,
                                        nn::DownsampleKind::kDiffStride};
  std::pair<double, double> strides{2.0, 2.0};
  double smoothness = 4.0;
  std::size_t reps = 30;  // at least 30
  std::uint64_t seed = 0;
};

BenchConfig parse_bench_config(const nlohmann::json& j);

struct BenchRow {
  std::string kind;
  Shape3 size;
  std::string pass;  // "forward" or "forward_backward"
  std::size_t reps = 0;
  double median_us = 0.0;
  double min_us = 0.0;
};

/// `kind,height,width,channels,s_h,s_w,pass,reps,median_us,min_us`
std::string bench_header();
std::string format_bench_row(const BenchRow& row, std::pair<double, double> strides);

/// Times one downsampling layer per (kind, size), forward and forward plus
/// backward, and reports the median over `reps` runs.
std::vector<BenchRow> run_bench(const BenchConfig& config);

}  // namespace diffstride::harness
