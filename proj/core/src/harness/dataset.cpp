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

#include "diffstride/harness/dataset.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace diffstride::harness {

int chebyshev_radius(int fv, int fh) { return std::max(std::abs(fv), std::abs(fh)); }

void BandlimitedSpec::validate() const {
  if (size < 4) throw std::invalid_argument("bandlimited: size must be >= 4");
  if (classes < 2) throw std::invalid_argument("bandlimited: need at least two classes");
  if (bands.size() != classes) {
    throw std::invalid_argument("bandlimited: need one band per class (" +
                                std::to_string(bands.size()) + " bands, " +
                                std::to_string(classes) + " classes)");
  }
  if (components == 0) throw std::invalid_argument("bandlimited: components must be >= 1");
  if (!(noise >= 0.0)) throw std::invalid_argument("bandlimited: noise must be >= 0");
  const int nyquist = static_cast<int>(size / 2);
  std::set<int> used;
  for (std::size_t k = 0; k < bands.size(); ++k) {
    if (bands[k].empty()) {
      throw std::invalid_argument("bandlimited: band " + std::to_string(k) + " is empty");
    }
    for (int r : bands[k]) {
      if (r < 1 || r >= nyquist) {
        throw std::invalid_argument("bandlimited: radius " + std::to_string(r) +
                                    " outside [1, " + std::to_string(nyquist) + ")");
      }
      if (!used.insert(r).second) {
        throw std::invalid_argument("bandlimited: radius " + std::to_string(r) +
                                    " appears in more than one band");
      }
    }
  }
}

Dataset gen_bandlimited_dataset(const BandlimitedSpec& spec) {
  spec.validate();
  const int N = static_cast<int>(spec.size);

  // Candidate frequencies per radius; fh >= 0 covers each cosine once up to
  // the sign ambiguity on the fh == 0 axis.
  std::vector<std::vector<std::pair<int, int>>> ring(static_cast<std::size_t>(N / 2));
  for (int fv = -N / 2 + 1; fv < N / 2; ++fv) {
    for (int fh = 0; fh < N / 2; ++fh) {
      const int r = chebyshev_radius(fv, fh);
      if (r >= 1 && r < N / 2) ring[static_cast<std::size_t>(r)].emplace_back(fv, fh);
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  Dataset ds;
  ds.images.reserve(spec.n);
  ds.labels.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t label = i % spec.classes;
    const auto& band = spec.bands[label];
    RealTensor x(Shape3{spec.size, spec.size, 1});
    for (std::size_t c = 0; c < spec.components; ++c) {
      const int r = band[static_cast<std::size_t>(rng() % band.size())];
      const auto& candidates = ring[static_cast<std::size_t>(r)];
      const auto [fv, fh] = candidates[static_cast<std::size_t>(rng() % candidates.size())];
      const double phi = phase(rng);
      for (int h = 0; h < N; ++h) {
        for (int w = 0; w < N; ++w) {
          const double theta = 2.0 * std::numbers::pi * (fv * h + fh * w) / N + phi;
          x(static_cast<std::size_t>(h), static_cast<std::size_t>(w), 0) += std::cos(theta);
        }
      }
    }
    if (spec.noise > 0.0) {
      for (double& v : x.data()) v += spec.noise * gauss(rng);
    }
    ds.images.push_back(std::move(x));
    ds.labels.push_back(label);
  }
  return ds;
}

}  // namespace diffstride::harness
