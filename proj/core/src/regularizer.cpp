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

#include "diffstride/regularizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace diffstride::regularizer {

void StrideStack::validate() const {
  if (strides.empty()) throw std::invalid_argument("StrideStack: need at least one layer");
  for (std::size_t l = 0; l < strides.size(); ++l) {
    const auto [sh, sw] = strides[l];
    if (!std::isfinite(sh) || !std::isfinite(sw) || sh < 1.0 || sw < 1.0) {
      throw std::invalid_argument("StrideStack: layer " + std::to_string(l) +
                                  " has a stride below 1");
    }
  }
}

double j_value(const StrideStack& stack) {
  stack.validate();
  double total = 0.0;
  double prefix = 1.0;
  for (const auto& [sh, sw] : stack.strides) {
    prefix /= sh * sw;
    total += prefix;
  }
  return total;
}

std::vector<std::pair<double, double>> j_gradient(const StrideStack& stack) {
  stack.validate();
  const std::size_t L = stack.strides.size();
  std::vector<double> prefix(L);
  double p = 1.0;
  for (std::size_t l = 0; l < L; ++l) {
    p /= stack.strides[l].first * stack.strides[l].second;
    prefix[l] = p;
  }
  // tail[k] = sum_{l >= k} prefix[l]; every such term carries 1/S^k once.
  std::vector<std::pair<double, double>> grad(L);
  double tail = 0.0;
  for (std::size_t k = L; k-- > 0;) {
    tail += prefix[k];
    grad[k] = {-tail / stack.strides[k].first, -tail / stack.strides[k].second};
  }
  return grad;
}

}  // namespace diffstride::regularizer
