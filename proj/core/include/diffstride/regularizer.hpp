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

#include <utility>
#include <vector>

namespace diffstride::regularizer {

/// Strides of consecutive downsampling layers, first layer first.
struct StrideStack {
  std::vector<std::pair<double, double>> strides;  // (S_h, S_w) per layer

  void validate() const;
};

/// Activation-count proxy J = sum_l prod_{i<=l} 1 / (S_h^i S_w^i).
/// The training loss adds lambda * J; lambda is not applied here.
double j_value(const StrideStack& stack);

/// Exact partials (dJ/dS_h^k, dJ/dS_w^k) for every layer k. All strictly
/// negative.
std::vector<std::pair<double, double>> j_gradient(const StrideStack& stack);

}  // namespace diffstride::regularizer
