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

#include "diffstride/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diffstride/fft.hpp"

namespace diffstride::spectrum {

HalfSpectrum::HalfSpectrum(std::size_t height, std::size_t spatial_width,
                           std::size_t channels)
    : height_(height),
      spatial_width_(spatial_width),
      half_width_(spatial_width / 2 + 1),
      channels_(channels) {
  if (height == 0 || spatial_width == 0 || channels == 0) {
    throw std::invalid_argument("HalfSpectrum: all dimensions must be >= 1");
  }
  data_.assign(height_ * half_width_ * channels_, Complex{});
}

long HalfSpectrum::row_frequency(std::size_t row) const {
  return static_cast<long>(row) - static_cast<long>(dc_row());
}

std::size_t HalfSpectrum::frequency_row(long frequency) const {
  const long h = static_cast<long>(height_);
  long r = (frequency + static_cast<long>(dc_row())) % h;
  if (r < 0) r += h;
  return static_cast<std::size_t>(r);
}

std::size_t HalfSpectrum::mirror_row(std::size_t row) const {
  return frequency_row(-row_frequency(row));
}

bool HalfSpectrum::is_self_conjugate_column(std::size_t col) const {
  return col == 0 || (spatial_width_ % 2 == 0 && col == spatial_width_ / 2);
}

double HalfSpectrum::hermitian_residual() const {
  double worst = 0.0;
  for (std::size_t col = 0; col < half_width_; ++col) {
    if (!is_self_conjugate_column(col)) continue;
    for (std::size_t row = 0; row < height_; ++row) {
      const std::size_t mirror = mirror_row(row);
      for (std::size_t c = 0; c < channels_; ++c) {
        worst = std::max(worst, std::abs((*this)(row, col, c) -
                                         std::conj((*this)(mirror, col, c))));
      }
    }
  }
  return worst;
}

bool HalfSpectrum::is_hermitian_consistent(double tol) const {
  double scale = 1.0;
  for (const Complex& v : data_) scale = std::max(scale, std::abs(v));
  return hermitian_residual() <= tol * scale;
}

void HalfSpectrum::project_hermitian() {
  for (std::size_t col = 0; col < half_width_; ++col) {
    if (!is_self_conjugate_column(col)) continue;
    for (std::size_t row = 0; row < height_; ++row) {
      const std::size_t mirror = mirror_row(row);
      if (mirror < row) continue;
      for (std::size_t c = 0; c < channels_; ++c) {
        Complex& a = (*this)(row, col, c);
        Complex& b = (*this)(mirror, col, c);
        const Complex sym = 0.5 * (a + std::conj(b));
        a = sym;
        b = std::conj(sym);
      }
    }
  }
}

bool HalfSpectrum::all_finite() const {
  for (const Complex& v : data_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

HalfSpectrum forward(const RealTensor& x) {
  if (x.height() == 0 || x.width() == 0 || x.channels() == 0) {
    throw std::invalid_argument("spectrum::forward: empty tensor " + to_string(x.shape()));
  }
  require_finite(x, "spectrum::forward");

  const std::size_t H = x.height();
  const std::size_t W = x.width();
  const std::size_t C = x.channels();
  HalfSpectrum y(H, W, C);
  const std::size_t Wh = y.half_width();
  const std::size_t dc = y.dc_row();
  const double scale = 1.0 / std::sqrt(static_cast<double>(H * W));

  const FftPlan& row_plan = FftPlan::get(W);
  const FftPlan& col_plan = FftPlan::get(H);
  std::vector<Complex> row(W);
  std::vector<Complex> col(H);
  std::vector<Complex> partial(H * Wh);

  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t w = 0; w < W; ++w) row[w] = Complex(x(h, w, c), 0.0);
      row_plan.forward(row);
      std::copy_n(row.begin(), Wh, partial.begin() + static_cast<long>(h * Wh));
    }
    for (std::size_t n = 0; n < Wh; ++n) {
      for (std::size_t h = 0; h < H; ++h) col[h] = partial[h * Wh + n];
      col_plan.forward(col);
      for (std::size_t r = 0; r < H; ++r) {
        y(r, n, c) = col[(r + H - dc) % H] * scale;
      }
    }
  }
  return y;
}

RealTensor synthesize(const HalfSpectrum& y) {
  const std::size_t H = y.height();
  const std::size_t W = y.spatial_width();
  const std::size_t C = y.channels();
  const std::size_t Wh = y.half_width();
  const std::size_t dc = y.dc_row();
  const double scale = 1.0 / std::sqrt(static_cast<double>(H * W));

  RealTensor x(Shape3{H, W, C});
  const FftPlan& row_plan = FftPlan::get(W);
  const FftPlan& col_plan = FftPlan::get(H);
  std::vector<Complex> row(W);
  std::vector<Complex> col(H);
  std::vector<Complex> partial(H * Wh);

  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t n = 0; n < Wh; ++n) {
      for (std::size_t k = 0; k < H; ++k) col[k] = y((k + dc) % H, n, c);
      col_plan.backward(col);
      for (std::size_t h = 0; h < H; ++h) partial[h * Wh + n] = col[h];
    }
    for (std::size_t h = 0; h < H; ++h) {
      std::fill(row.begin(), row.end(), Complex{});
      for (std::size_t n = 0; n < Wh; ++n) {
        const Complex z = partial[h * Wh + n];
        if (y.is_self_conjugate_column(n)) {
          row[n] = Complex(z.real(), 0.0);
        } else {
          row[n] = z;
          row[W - n] = std::conj(z);
        }
      }
      row_plan.backward(row);
      for (std::size_t w = 0; w < W; ++w) x(h, w, c) = row[w].real() * scale;
    }
  }
  return x;
}

RealTensor inverse(const HalfSpectrum& y, double tol) {
  if (!y.all_finite()) {
    throw std::invalid_argument("spectrum::inverse: non-finite coefficient");
  }
  if (!y.is_hermitian_consistent(tol)) {
    throw std::invalid_argument(
        "spectrum::inverse: self-conjugate columns are not Hermitian (residual " +
        std::to_string(y.hermitian_residual()) + ")");
  }
  return synthesize(y);
}

RealTensor vjp_forward(const HalfSpectrum& g) {
  if (!g.all_finite()) {
    throw std::invalid_argument("spectrum::vjp_forward: non-finite gradient");
  }
  HalfSpectrum scaled = g;
  for (std::size_t r = 0; r < g.height(); ++r) {
    for (std::size_t n = 0; n < g.half_width(); ++n) {
      if (g.is_self_conjugate_column(n)) continue;
      for (std::size_t c = 0; c < g.channels(); ++c) scaled(r, n, c) *= 0.5;
    }
  }
  return synthesize(scaled);
}

HalfSpectrum vjp_inverse(const RealTensor& g) {
  HalfSpectrum out = forward(g);
  for (std::size_t r = 0; r < out.height(); ++r) {
    for (std::size_t n = 0; n < out.half_width(); ++n) {
      if (out.is_self_conjugate_column(n)) continue;
      for (std::size_t c = 0; c < out.channels(); ++c) out(r, n, c) *= 2.0;
    }
  }
  return out;
}

namespace {

void require_same_layout(const HalfSpectrum& a, const HalfSpectrum& b, const char* what) {
  if (a.height() != b.height() || a.spatial_width() != b.spatial_width() ||
      a.channels() != b.channels()) {
    throw std::invalid_argument(std::string(what) + ": spectrum shape mismatch");
  }
}

}  // namespace

double weighted_inner(const HalfSpectrum& a, const HalfSpectrum& b) {
  require_same_layout(a, b, "weighted_inner");
  double acc = 0.0;
  for (std::size_t r = 0; r < a.height(); ++r) {
    for (std::size_t n = 0; n < a.half_width(); ++n) {
      const double w = a.column_weight(n);
      for (std::size_t c = 0; c < a.channels(); ++c) {
        acc += w * (std::conj(a(r, n, c)) * b(r, n, c)).real();
      }
    }
  }
  return acc;
}

double plain_inner(const HalfSpectrum& a, const HalfSpectrum& b) {
  require_same_layout(a, b, "plain_inner");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += (std::conj(a.data()[i]) * b.data()[i]).real();
  }
  return acc;
}

double weighted_energy(const HalfSpectrum& y) { return weighted_inner(y, y); }

}  // namespace diffstride::spectrum
