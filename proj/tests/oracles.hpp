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

// Slow reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "diffstride/masking.hpp"
#include "diffstride/tensor.hpp"

namespace oracle {

using diffstride::Complex;
using diffstride::RealTensor;
using diffstride::Shape3;

/// Full H x W complex grid, indexed [k1 * W + k2] by residues.
struct Grid {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<Complex> v;
  Complex& at(std::size_t a, std::size_t b) { return v[a * w + b]; }
  Complex at(std::size_t a, std::size_t b) const { return v[a * w + b]; }
};

inline long signed_freq(std::size_t k, std::size_t n) {
  // Residue k of n mapped to -floor(n/2) .. ceil(n/2) - 1.
  const long half_up = static_cast<long>((n + 1) / 2);
  return static_cast<long>(k) < half_up ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

inline std::size_t residue(long f, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((f % m) + m) % m);
}

/// Unitary DFT by direct summation, one channel.
inline Grid dft(const RealTensor& x, std::size_t c) {
  const std::size_t H = x.height();
  const std::size_t W = x.width();
  Grid g{H, W, std::vector<Complex>(H * W)};
  const double scale = 1.0 / std::sqrt(static_cast<double>(H * W));
  for (std::size_t k1 = 0; k1 < H; ++k1) {
    for (std::size_t k2 = 0; k2 < W; ++k2) {
      Complex s = 0.0;
      for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t w = 0; w < W; ++w) {
          const double t = -2.0 * std::numbers::pi *
                           (static_cast<double>((k1 * h) % H) / static_cast<double>(H) +
                            static_cast<double>((k2 * w) % W) / static_cast<double>(W));
          s += x(h, w, c) * Complex(std::cos(t), std::sin(t));
        }
      }
      g.at(k1, k2) = s * scale;
    }
  }
  return g;
}

/// Unitary inverse DFT by direct summation.
inline std::vector<Complex> idft(const Grid& g) {
  std::vector<Complex> out(g.h * g.w);
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.h * g.w));
  for (std::size_t h = 0; h < g.h; ++h) {
    for (std::size_t w = 0; w < g.w; ++w) {
      Complex s = 0.0;
      for (std::size_t k1 = 0; k1 < g.h; ++k1) {
        for (std::size_t k2 = 0; k2 < g.w; ++k2) {
          const double t = 2.0 * std::numbers::pi *
                           (static_cast<double>((k1 * h) % g.h) / static_cast<double>(g.h) +
                            static_cast<double>((k2 * w) % g.w) / static_cast<double>(g.w));
          s += g.at(k1, k2) * Complex(std::cos(t), std::sin(t));
        }
      }
      out[h * g.w + w] = s * scale;
    }
  }
  return out;
}

/// Full-grid low-pass, crop and inverse. `mask` is evaluated on the signed
/// frequency pair (f_v, |f_h|); the cropped grid keeps vertical
/// frequencies -floor(H'/2) .. ceil(H'/2) - 1 and horizontal frequencies
/// 0 .. floor(W'/2) with the negative half completed by conjugate symmetry.
/// Self-conjugate bins of the new grid take their Hermitian part.
/// Returns the real output and the largest imaginary residue seen.
inline RealTensor lowpass_crop(const RealTensor& x, std::size_t out_h, std::size_t out_w,
                               const std::function<double(long, long)>& mask,
                               double* max_imag = nullptr) {
  RealTensor y(Shape3{out_h, out_w, x.channels()});
  if (max_imag) *max_imag = 0.0;
  for (std::size_t c = 0; c < x.channels(); ++c) {
    const Grid X = dft(x, c);
    Grid Z{out_h, out_w, std::vector<Complex>(out_h * out_w)};
    for (std::size_t a = 0; a < out_h; ++a) {
      const long fa = signed_freq(a, out_h);
      for (std::size_t b = 0; b <= out_w / 2; ++b) {
        const long fb = static_cast<long>(b);
        Z.at(a, b) = mask(fa, fb) * X.at(residue(fa, x.height()), residue(fb, x.width()));
      }
    }
    // Hermitian part on the self-conjugate columns.
    Grid P = Z;
    for (std::size_t b = 0; b <= out_w / 2; ++b) {
      if (b != 0 && !(out_w % 2 == 0 && b == out_w / 2)) continue;
      for (std::size_t a = 0; a < out_h; ++a) {
        P.at(a, b) = 0.5 * (Z.at(a, b) + std::conj(Z.at(residue(-static_cast<long>(a), out_h), b)));
      }
    }
    for (std::size_t a = 0; a < out_h; ++a) {
      for (std::size_t b = out_w / 2 + 1; b < out_w; ++b) {
        P.at(a, b) = std::conj(P.at(residue(-static_cast<long>(a), out_h), out_w - b));
      }
    }
    const std::vector<Complex> r = idft(P);
    for (std::size_t h = 0; h < out_h; ++h) {
      for (std::size_t w = 0; w < out_w; ++w) {
        y(h, w, c) = r[h * out_w + w].real();
        if (max_imag) *max_imag = std::max(*max_imag, std::abs(r[h * out_w + w].imag()));
      }
    }
  }
  return y;
}

/// Window value at signed vertical frequency fv and horizontal
/// frequency |fh| by direct substitution.
inline double window(const diffstride::masking::MaskSpec& s, long fv, long fh) {
  const double R = s.smoothness;
  const double mh = (R + static_cast<double>(s.height) / (2.0 * s.stride_h) -
                     std::abs(static_cast<double>(fv))) / R;
  const double mw = (R + static_cast<double>(s.width) / (2.0 * s.stride_w) + 1.0 -
                     std::abs(static_cast<double>(fh))) / R;
  return std::clamp(mh, 0.0, 1.0) * std::clamp(mw, 0.0, 1.0);
}

/// Stride-1 "same" cross-correlation by the textbook quadruple sum.
inline RealTensor conv_same(const RealTensor& x, const std::vector<double>& k, std::size_t kh,
                            std::size_t kw, std::size_t cout) {
  const std::size_t cin = x.channels();
  RealTensor y(Shape3{x.height(), x.width(), cout});
  for (std::size_t h = 0; h < x.height(); ++h)
    for (std::size_t w = 0; w < x.width(); ++w)
      for (std::size_t co = 0; co < cout; ++co) {
        double s = 0.0;
        for (std::size_t i = 0; i < kh; ++i)
          for (std::size_t j = 0; j < kw; ++j)
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const long hh = static_cast<long>(h + i) - static_cast<long>(kh / 2);
              const long ww = static_cast<long>(w + j) - static_cast<long>(kw / 2);
              if (hh < 0 || ww < 0 || hh >= static_cast<long>(x.height()) ||
                  ww >= static_cast<long>(x.width()))
                continue;
              s += x(static_cast<std::size_t>(hh), static_cast<std::size_t>(ww), ci) *
                   k[((i * kw + j) * cin + ci) * cout + co];
            }
        y(h, w, co) = s;
      }
  return y;
}

/// J by explicit nested products.
inline double j_naive(const std::vector<std::pair<double, double>>& strides) {
  double total = 0.0;
  for (std::size_t l = 0; l < strides.size(); ++l) {
    double p = 1.0;
    for (std::size_t i = 0; i <= l; ++i) p /= strides[i].first * strides[i].second;
    total += p;
  }
  return total;
}

/// Central differences of f over every entry of `v`.
inline std::vector<double> central_diff(std::span<double> v, double eps,
                                        const std::function<double()>& f) {
  std::vector<double> g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = v[i];
    v[i] = s + eps;
    const double up = f();
    v[i] = s - eps;
    const double down = f();
    v[i] = s;
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

inline RealTensor random_tensor(std::mt19937_64& rng, Shape3 shape, double sigma = 1.0) {
  std::normal_distribution<double> n(0.0, sigma);
  RealTensor t(shape);
  for (double& v : t.data()) v = n(rng);
  return t;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace oracle
