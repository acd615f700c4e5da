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
#include <span>
#include <vector>

#include "diffstride/tensor.hpp"

namespace diffstride::spectrum {

/// Half-spectrum of a real (H, W, C) signal under the unitary 2D DFT.
///
/// Rows cover the full circle of vertical frequencies with DC at row
/// `dc_row() == H / 2` (integer division), so row r holds frequency
/// r - H/2 in [-floor(H/2), ceil(H/2) - 1]. Columns hold horizontal
/// frequencies 0..floor(W/2); the negative half is implied by Hermitian
/// symmetry y[f, n] = conj(y[-f, -n]).
class HalfSpectrum {
 public:
  HalfSpectrum() = default;
  HalfSpectrum(std::size_t height, std::size_t spatial_width, std::size_t channels);

  std::size_t height() const { return height_; }
  std::size_t half_width() const { return half_width_; }
  std::size_t spatial_width() const { return spatial_width_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  Complex& operator()(std::size_t row, std::size_t col, std::size_t c) {
    return data_[(row * half_width_ + col) * channels_ + c];
  }
  Complex operator()(std::size_t row, std::size_t col, std::size_t c) const {
    return data_[(row * half_width_ + col) * channels_ + c];
  }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  std::size_t dc_row() const { return height_ / 2; }
  /// Signed vertical frequency held by a stored row.
  long row_frequency(std::size_t row) const;
  /// Stored row holding the given signed vertical frequency (taken mod H).
  std::size_t frequency_row(long frequency) const;
  /// Row holding the negated frequency of `row`.
  std::size_t mirror_row(std::size_t row) const;

  /// DC column and, for even W, the Nyquist column pair each frequency with
  /// its own conjugate partner inside the stored half.
  bool is_self_conjugate_column(std::size_t col) const;
  /// 1 for self-conjugate columns, 2 for columns standing in for a
  /// conjugate pair.
  double column_weight(std::size_t col) const {
    return is_self_conjugate_column(col) ? 1.0 : 2.0;
  }

  /// True when every self-conjugate column satisfies
  /// |y[f, n] - conj(y[-f, n])| <= tol * max(1, max |y|).
  bool is_hermitian_consistent(double tol) const;
  /// Largest |y[f, n] - conj(y[-f, n])| over self-conjugate columns.
  double hermitian_residual() const;
  /// Replaces each self-conjugate column by its Hermitian part,
  /// (y[f] + conj(y[-f])) / 2. Idempotent and linear.
  void project_hermitian();

  bool all_finite() const;

 private:
  std::size_t height_ = 0;
  std::size_t spatial_width_ = 0;
  std::size_t half_width_ = 0;
  std::size_t channels_ = 0;
  std::vector<Complex> data_;
};

inline constexpr double kHermitianTolerance = 1e-8;

/// Unitary 2D DFT of every channel: y = (1/sqrt(HW)) sum x e^{-2 pi i (...)}.
/// Rejects non-finite input.
HalfSpectrum forward(const RealTensor& x);

/// Exact inverse of `forward`. Rejects spectra whose self-conjugate columns
/// are not Hermitian within `tol` (relative to max(1, max |y|)).
RealTensor inverse(const HalfSpectrum& y, double tol = kHermitianTolerance);

/// Real synthesis sum_n w(n) Re(y[f, n] e^{+i theta}) / sqrt(HW) with no
/// consistency check. Equals `inverse` on Hermitian-consistent input and
/// silently keeps only the Hermitian part otherwise. It is the adjoint of
/// `forward` under the column-weighted inner product.
RealTensor synthesize(const HalfSpectrum& y);

/// Gradient of a loss wrt x given its gradient wrt the stored coefficients
/// of y = forward(x) (g = dL/dRe y + i dL/dIm y per stored entry).
RealTensor vjp_forward(const HalfSpectrum& g);

/// Gradient wrt the stored coefficients of y given the gradient wrt
/// x = inverse(y). `g` must have y's spatial shape.
HalfSpectrum vjp_inverse(const RealTensor& g);

/// sum over stored entries of w(n) Re(conj(a) b).
double weighted_inner(const HalfSpectrum& a, const HalfSpectrum& b);
/// sum over stored entries of Re(conj(a) b).
double plain_inner(const HalfSpectrum& a, const HalfSpectrum& b);
/// sum w(n) |y|^2; equals ||x||^2 for y = forward(x).
double weighted_energy(const HalfSpectrum& y);

}  // namespace diffstride::spectrum
