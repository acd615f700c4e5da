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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffstride/nn/model.hpp"

namespace diffstride::harness {

struct GradcheckConfig {
  std::uint64_t seed = 0;
  std::size_t instances = 10;  // random instances per check
  double step = 1e-5;          // central-difference step
};

GradcheckConfig parse_gradcheck_config(const nlohmann::json& j);

struct GradcheckRow {
  std::string check;
  std::size_t instances = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct GradcheckReport {
  std::vector<GradcheckRow> rows;

  bool all_pass() const;
  /// Fixed-width table, one line per check.
  std::string table() const;
};

/// max_i |a_i - b_i| / max(max_i |a_i|, max_i |b_i|, floor).
double relative_error(std::span<const double> analytic, std::span<const double> numeric,
                      double floor = 1e-12);

// Individual checks. Each draws `instances` random problems from `seed`.
GradcheckRow check_spectrum_forward(const GradcheckConfig& c);
GradcheckRow check_spectrum_inverse(const GradcheckConfig& c);
GradcheckRow check_mask_derivatives(const GradcheckConfig& c);
/// Stride gradients of a DiffStride layer against frozen-crop differences.
/// The first instance is a 32x32 input at S = (2.6, 3.1).
GradcheckRow check_diffstride_strides(const GradcheckConfig& c);
GradcheckRow check_diffstride_input(const GradcheckConfig& c);
GradcheckRow check_regularizer(const GradcheckConfig& c);
GradcheckRow check_conv2d(const GradcheckConfig& c);
GradcheckRow check_residual_block(const GradcheckConfig& c);
/// conv -> relu -> DiffStride -> global pool -> dense -> cross-entropy,
/// every parameter and both strides.
GradcheckRow check_network(const GradcheckConfig& c, nn::GlobalPool pool);

GradcheckReport run_gradcheck(const GradcheckConfig& config);

}  // namespace diffstride::harness
