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

#include "diffstride/layer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace diffstride::layer {

using masking::IndexRange;
using masking::TargetShape;
using spectrum::HalfSpectrum;

StrideParams::StrideParams(double sh, double sw, std::size_t in_h, std::size_t in_w, bool tie)
    : s_h(sh), s_w(sw), bound_h(in_h), bound_w(in_w), shared(tie) {
  if (in_h == 0 || in_w == 0) throw std::invalid_argument("StrideParams: empty bounds");
  if (shared) s_w = s_h;
}

void StrideParams::accumulate(double gh, double gw) {
  if (shared) {
    grad_h += gh + gw;
    grad_w = grad_h;
  } else {
    grad_h += gh;
    grad_w += gw;
  }
}

bool StrideParams::in_box() const {
  const auto ok = [](double s, std::size_t bound) {
    return std::isfinite(s) && s >= 1.0 &&
           (bound == 1 ? s == 1.0 : s < static_cast<double>(bound));
  };
  return ok(s_h, bound_h) && ok(s_w, bound_w) && (!shared || s_h == s_w);
}

namespace {

double clamp_stride(double s, std::size_t bound) {
  const double upper = std::max(1.0, static_cast<double>(bound) - kBoxMargin);
  if (std::isnan(s)) return 1.0;
  return std::clamp(s, 1.0, upper);
}

masking::MaskSpec mask_spec_for(Shape3 in, const StrideParams& p, double smoothness) {
  masking::MaskSpec spec;
  spec.height = in.height;
  spec.width = in.width;
  spec.smoothness = smoothness;
  spec.stride_h = p.s_h;
  spec.stride_w = p.s_w;
  return spec;
}

}  // namespace

StrideParams project_strides(StrideParams params) {
  params.s_h = clamp_stride(params.s_h, params.bound_h);
  params.s_w = clamp_stride(params.s_w, params.bound_w);
  if (params.shared) {
    const double tied = std::min(params.s_h, clamp_stride(params.s_h, params.bound_w));
    params.s_h = params.s_w = tied;
  }
  return params;
}

HalfSpectrum crop_spectrum(const HalfSpectrum& y, IndexRange rows, IndexRange cols,
                           std::size_t spatial_width) {
  if (rows.end > y.height() || cols.end > y.half_width() || rows.size() == 0) {
    throw std::invalid_argument("crop_spectrum: crop window exceeds spectrum");
  }
  HalfSpectrum out(rows.size(), spatial_width, y.channels());
  if (cols.begin != 0 || cols.size() != out.half_width()) {
    throw std::invalid_argument("crop_spectrum: column window must be 0..floor(W'/2)");
  }
  if (rows.begin + out.dc_row() != y.dc_row()) {
    throw std::invalid_argument("crop_spectrum: row window is not centered on DC");
  }
  for (std::size_t r = 0; r < out.height(); ++r) {
    for (std::size_t n = 0; n < out.half_width(); ++n) {
      for (std::size_t c = 0; c < y.channels(); ++c) {
        out(r, n, c) = y(rows.begin + r, n, c);
      }
    }
  }
  return out;
}

HalfSpectrum pad_spectrum(const HalfSpectrum& g, IndexRange rows, IndexRange cols,
                          std::size_t height, std::size_t spatial_width) {
  HalfSpectrum out(height, spatial_width, g.channels());
  if (rows.end > height || cols.end > out.half_width() || rows.size() != g.height() ||
      cols.size() != g.half_width()) {
    throw std::invalid_argument("pad_spectrum: window does not match gradient shape");
  }
  for (std::size_t r = 0; r < g.height(); ++r) {
    for (std::size_t n = 0; n < g.half_width(); ++n) {
      for (std::size_t c = 0; c < g.channels(); ++c) {
        out(rows.begin + r, cols.begin + n, c) = g(r, n, c);
      }
    }
  }
  return out;
}

DiffStrideResult diffstride_forward(const RealTensor& x, const StrideParams& params,
                                    double smoothness, std::optional<TargetShape> pinned) {
  DiffStrideResult result;
  DiffStrideContext& ctx = result.context;
  ctx.input_shape = x.shape();
  ctx.spec = mask_spec_for(x.shape(), params, smoothness);
  ctx.mask = masking::build_crop_mask(ctx.spec);
  ctx.output = pinned.value_or(ctx.mask.target);
  if (ctx.output.height == 0 || ctx.output.width == 0 || ctx.output.height > x.height() ||
      ctx.output.width > x.width()) {
    throw std::invalid_argument("diffstride_forward: pinned crop outside input");
  }
  ctx.rows = masking::centered_rows(x.height(), ctx.output.height);
  ctx.cols = masking::leading_cols(ctx.output.width);

  ctx.spectrum = spectrum::forward(x);
  HalfSpectrum masked = ctx.spectrum;
  for (std::size_t r = 0; r < masked.height(); ++r) {
    for (std::size_t n = 0; n < masked.half_width(); ++n) {
      const double m = ctx.mask(r, n);
      for (std::size_t c = 0; c < masked.channels(); ++c) masked(r, n, c) *= m;
    }
  }
  HalfSpectrum cropped = crop_spectrum(masked, ctx.rows, ctx.cols, ctx.output.width);
  cropped.project_hermitian();
  result.output = spectrum::inverse(cropped);
  return result;
}

DiffStrideGrads diffstride_vjp(const RealTensor& gout, DiffStrideContext& ctx) {
  if (ctx.consumed) {
    throw std::logic_error("diffstride backward: context already consumed");
  }
  if (gout.height() != ctx.output.height || gout.width() != ctx.output.width ||
      gout.channels() != ctx.input_shape.channels) {
    throw std::invalid_argument("diffstride backward: gradient shape " +
                                to_string(gout.shape()) + " does not match output");
  }
  if (!gout.all_finite()) {
    throw std::invalid_argument("diffstride backward: non-finite upstream gradient");
  }
  ctx.consumed = true;

  const HalfSpectrum g_cropped = spectrum::vjp_inverse(gout);
  HalfSpectrum g_masked = pad_spectrum(g_cropped, ctx.rows, ctx.cols,
                                       ctx.input_shape.height, ctx.input_shape.width);

  const masking::MaskDerivatives dmask = masking::dmask_dstride(ctx.spec);
  const masking::CropMask& mask = ctx.mask;
  DiffStrideGrads grads;
  for (std::size_t r = 0; r < g_masked.height(); ++r) {
    for (std::size_t n = 0; n < g_masked.half_width(); ++n) {
      double g_mask = 0.0;
      for (std::size_t c = 0; c < g_masked.channels(); ++c) {
        g_mask += (std::conj(ctx.spectrum(r, n, c)) * g_masked(r, n, c)).real();
        g_masked(r, n, c) *= mask(r, n);
      }
      grads.stride_h += g_mask * dmask.d_vertical[r] * mask.horizontal[n];
      grads.stride_w += g_mask * mask.vertical[r] * dmask.d_horizontal[n];
    }
  }
  grads.input = spectrum::vjp_forward(g_masked);

  if (!std::isfinite(grads.stride_h) || !std::isfinite(grads.stride_w) ||
      !grads.input.all_finite()) {
    throw std::runtime_error("diffstride backward: non-finite gradient (dS_h=" +
                             std::to_string(grads.stride_h) +
                             ", dS_w=" + std::to_string(grads.stride_w) + ")");
  }
  return grads;
}

RealTensor diffstride_backward(const RealTensor& gout, DiffStrideContext& ctx,
                               StrideParams& params) {
  DiffStrideGrads grads = diffstride_vjp(gout, ctx);
  params.accumulate(grads.stride_h, grads.stride_w);
  return std::move(grads.input);
}

TargetShape spectral_pool_shape(Shape3 input, std::pair<double, double> strides) {
  const auto [sh, sw] = strides;
  if (!(sh >= 1.0) || !(sw >= 1.0) || !std::isfinite(sh) || !std::isfinite(sw)) {
    throw std::invalid_argument("spectral_pool: strides must be finite and >= 1");
  }
  const double h = std::floor(static_cast<double>(input.height) / sh);
  const double w = std::floor(static_cast<double>(input.width) / sw);
  if (h < 1.0 || w < 1.0) {
    throw std::invalid_argument("spectral_pool: strides leave an empty output for input " +
                                to_string(input));
  }
  return TargetShape{static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
}

RealTensor spectral_pool(const RealTensor& x, std::pair<double, double> strides) {
  const TargetShape target = spectral_pool_shape(x.shape(), strides);
  HalfSpectrum cropped =
      crop_spectrum(spectrum::forward(x), masking::centered_rows(x.height(), target.height),
                    masking::leading_cols(target.width), target.width);
  cropped.project_hermitian();
  return spectrum::inverse(cropped);
}

RealTensor spectral_pool_vjp(const RealTensor& gout, Shape3 input_shape) {
  if (gout.channels() != input_shape.channels || gout.height() > input_shape.height ||
      gout.width() > input_shape.width) {
    throw std::invalid_argument("spectral_pool_vjp: gradient shape does not fit input");
  }
  const HalfSpectrum padded = pad_spectrum(
      spectrum::vjp_inverse(gout), masking::centered_rows(input_shape.height, gout.height()),
      masking::leading_cols(gout.width()), input_shape.height, input_shape.width);
  return spectrum::vjp_forward(padded);
}

}  // namespace diffstride::layer
