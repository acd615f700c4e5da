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

#include "diffstride/fft.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace diffstride {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), pow2_(is_power_of_two(n)) {
  if (n == 0) throw std::invalid_argument("FftPlan: length must be >= 1");

  if (pow2_) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    bitrev_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) {
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      }
      bitrev_[i] = r;
    }
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(n);
      twiddles_[k] = Complex(std::cos(angle), std::sin(angle));
    }
    return;
  }

  // k^2 mod 2n keeps the chirp phase argument small for large k.
  const std::size_t m = next_power_of_two(2 * n - 1);
  chirp_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k2 = (k * k) % (2 * n);
    const double angle =
        -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp_[k] = Complex(std::cos(angle), std::sin(angle));
  }
  inner_ = std::make_unique<FftPlan>(m);
  chirp_filter_.assign(m, Complex{});
  chirp_filter_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    chirp_filter_[k] = std::conj(chirp_[k]);
    chirp_filter_[m - k] = std::conj(chirp_[k]);
  }
  inner_->forward(chirp_filter_);
}

const FftPlan& FftPlan::get(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
  }
  return *it->second;
}

void FftPlan::radix2(std::span<Complex> data, bool inverse) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        Complex w = twiddles_[k * step];
        if (inverse) w = std::conj(w);
        const Complex a = data[start + k];
        const Complex b = data[start + k + half] * w;
        data[start + k] = a + b;
        data[start + k + half] = a - b;
      }
    }
  }
}

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
  if (data.size() != n_) {
    throw std::invalid_argument("FftPlan: buffer length does not match plan");
  }
  if (n_ == 1) return;
  if (pow2_) {
    radix2(data, inverse);
    return;
  }

  // The backward transform is conj(forward(conj(x))).
  const std::size_t m = inner_->size();
  std::vector<Complex> work(m, Complex{});
  for (std::size_t k = 0; k < n_; ++k) {
    const Complex v = inverse ? std::conj(data[k]) : data[k];
    work[k] = v * chirp_[k];
  }
  inner_->forward(work);
  for (std::size_t k = 0; k < m; ++k) work[k] *= chirp_filter_[k];
  inner_->backward(work);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n_; ++k) {
    const Complex v = work[k] * scale * chirp_[k];
    data[k] = inverse ? std::conj(v) : v;
  }
}

}  // namespace diffstride
