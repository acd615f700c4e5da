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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "diffstride/masking.hpp"
#include "oracles.hpp"

using namespace diffstride::masking;

namespace {

MaskSpec spec(std::size_t h, std::size_t w, double sh, double sw, double r = 4.0) {
  return MaskSpec{h, w, r, sh, sw};
}

MaskSpec random_spec(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> side(2, 48);
  MaskSpec s;
  s.height = side(rng);
  s.width = side(rng);
  s.smoothness = std::uniform_real_distribution<double>(0.5, 6.0)(rng);
  s.stride_h = std::uniform_real_distribution<double>(1.0, static_cast<double>(s.height) - 1e-3)(rng);
  s.stride_w = std::uniform_real_distribution<double>(1.0, static_cast<double>(s.width) - 1e-3)(rng);
  return s;
}

}  // namespace

TEST(Masking, WorkedHorizontalTaper) {
  const auto m = mask_w(spec(16, 16, 2.0, 2.0));
  ASSERT_EQ(m.size(), 9u);
  EXPECT_EQ(m[0], 1.0);
  EXPECT_EQ(m[5], 1.0);
  EXPECT_EQ(m[6], 0.75);
  EXPECT_EQ(m[7], 0.5);
  EXPECT_EQ(m[8], 0.25);
}

TEST(Masking, WorkedVerticalTaper) {
  const auto m = mask_h(spec(16, 16, 2.0, 2.0));
  ASSERT_EQ(m.size(), 16u);
  EXPECT_EQ(m[8], 1.0);
  EXPECT_EQ(m[14], 0.5);
  // Distances 4..8 from DC walk down the taper.
  const double expect[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < 5; ++i) EXPECT_EQ(m[static_cast<std::size_t>(i)], expect[i]);
}

TEST(Masking, WorkedDerivative) {
  const auto d = dmask_dstride(spec(16, 16, 2.0, 2.0));
  EXPECT_DOUBLE_EQ(d.d_horizontal[6], -0.5);
  EXPECT_EQ(d.d_horizontal[0], 0.0);
  EXPECT_DOUBLE_EQ(d.d_vertical[14], -0.5);
}

TEST(Masking, IdentityStrideIsAllOnes) {
  for (std::size_t n : {1u, 2u, 7u, 16u, 33u}) {
    for (double r : {0.5, 1.0, 4.0}) {
      const CropMask m = build_crop_mask(spec(n, n, 1.0, 1.0, r));
      for (double v : m.values) EXPECT_EQ(v, 1.0);
      EXPECT_EQ(m.target, (TargetShape{n, n}));
    }
  }
}

TEST(Masking, MatchesDirectSubstitution) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const MaskSpec s = random_spec(rng);
    const CropMask m = build_crop_mask(s);
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t n = 0; n < m.cols; ++n) {
        const long fv = static_cast<long>(r) - static_cast<long>(s.height / 2);
        EXPECT_NEAR(m(r, n), oracle::window(s, fv, static_cast<long>(n)), 1e-15);
      }
    }
  }
}

TEST(Masking, RankOneSymmetricMonotone) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const MaskSpec s = random_spec(rng);
    const CropMask m = build_crop_mask(s);
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t n = 0; n < m.cols; ++n) ASSERT_EQ(m(r, n), m.vertical[r] * m.horizontal[n]);
    const std::size_t dc = s.height / 2;
    for (std::size_t k = 1; k <= dc && dc + k < s.height; ++k) {
      ASSERT_EQ(m.vertical[dc - k], m.vertical[dc + k]);
    }
    for (std::size_t n = 1; n < m.cols; ++n) ASSERT_LE(m.horizontal[n], m.horizontal[n - 1]);
    for (double v : m.values) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    ASSERT_EQ(m.vertical[dc], 1.0);
    ASSERT_EQ(m.horizontal[0], 1.0);
  }
}

TEST(Masking, LargerStrideNeverWidensTheWindow) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    MaskSpec a = random_spec(rng);
    MaskSpec b = a;
    b.stride_h = std::min(a.stride_h * 1.3, static_cast<double>(a.height) - 1e-3);
    b.stride_w = std::min(a.stride_w * 1.3, static_cast<double>(a.width) - 1e-3);
    const auto ha = mask_h(a), hb = mask_h(b), wa = mask_w(a), wb = mask_w(b);
    for (std::size_t i = 0; i < ha.size(); ++i) ASSERT_LE(hb[i], ha[i]);
    for (std::size_t i = 0; i < wa.size(); ++i) ASSERT_LE(wb[i], wa[i]);
    const TargetShape ta = target_shape(a), tb = target_shape(b);
    ASSERT_LE(tb.height, ta.height);
    ASSERT_LE(tb.width, ta.width);
  }
}

TEST(Masking, DerivativesAreNonPositiveAndMatchFiniteDifferences) {
  std::mt19937_64 rng(14);
  const double eps = 1e-6;
  for (int trial = 0; trial < 300; ++trial) {
    MaskSpec s = random_spec(rng);
    s.stride_h = std::min(s.stride_h, static_cast<double>(s.height) - 0.01);
    s.stride_w = std::min(s.stride_w, static_cast<double>(s.width) - 0.01);
    const MaskDerivatives d = dmask_dstride(s);
    for (double v : d.d_vertical) ASSERT_LE(v, 0.0);
    for (double v : d.d_horizontal) ASSERT_LE(v, 0.0);

    MaskSpec up = s, dn = s;
    up.stride_w += eps;
    dn.stride_w -= eps;
    const auto wu = mask_w(up), wd = mask_w(dn), w0 = mask_w(s);
    for (std::size_t n = 0; n < w0.size(); ++n) {
      const bool open = w0[n] > 0.0 && w0[n] < 1.0;
      if (open != (wu[n] > 0.0 && wu[n] < 1.0) || open != (wd[n] > 0.0 && wd[n] < 1.0)) continue;
      EXPECT_NEAR(d.d_horizontal[n], (wu[n] - wd[n]) / (2 * eps), 1e-6);
    }
    up = s;
    dn = s;
    up.stride_h += eps;
    dn.stride_h -= eps;
    const auto hu = mask_h(up), hd = mask_h(dn), h0 = mask_h(s);
    for (std::size_t m = 0; m < h0.size(); ++m) {
      const bool open = h0[m] > 0.0 && h0[m] < 1.0;
      if (open != (hu[m] > 0.0 && hu[m] < 1.0) || open != (hd[m] > 0.0 && hd[m] < 1.0)) continue;
      EXPECT_NEAR(d.d_vertical[m], (hu[m] - hd[m]) / (2 * eps), 1e-6);
    }
  }
}

TEST(Masking, TargetShapeFormula) {
  EXPECT_EQ(target_shape(spec(32, 32, 2.0, 2.0)), (TargetShape{24, 24}));
  EXPECT_EQ(target_shape(spec(32, 32, 1.0, 1.0)), (TargetShape{32, 32}));
  EXPECT_EQ(target_shape(spec(16, 16, 2.0, 2.0)), (TargetShape{16, 16}));
  EXPECT_EQ(target_shape(spec(64, 40, 3.0, 2.5, 2.0)), (TargetShape{25, 20}));
}

TEST(Masking, CropGeometryFollowsTargetShape) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 500; ++trial) {
    const MaskSpec s = random_spec(rng);
    const CropMask m = build_crop_mask(s);
    ASSERT_EQ(m.crop_rows.size(), m.target.height);
    ASSERT_EQ(m.crop_cols.size(), m.target.width / 2 + 1);
    ASSERT_EQ(m.crop_cols.begin, 0u);
    // DC stays at floor(H'/2) of the cropped rows.
    ASSERT_EQ(s.height / 2 - m.crop_rows.begin, m.target.height / 2);
    ASSERT_GE(m.target.height, 1u);
    ASSERT_GE(m.target.width, 1u);
  }
}

TEST(Masking, SupportCoversPositiveEntriesOnly) {
  const CropMask m = build_crop_mask(spec(32, 32, 3.0, 3.0));
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t n = 0; n < m.cols; ++n) {
      const bool inside = m.row_support.contains(r) && m.col_support.contains(n);
      if (!inside) {
        EXPECT_EQ(m(r, n), 0.0);
      }
      if (m(r, n) > 0.0) {
        EXPECT_TRUE(inside);
      }
    }
  }
}

TEST(Masking, RejectsInfeasibleSpecs) {
  EXPECT_THROW(mask_h(spec(16, 16, 0.9, 2.0)), std::invalid_argument);
  EXPECT_THROW(mask_w(spec(16, 16, 2.0, 16.0)), std::invalid_argument);
  EXPECT_THROW(mask_w(spec(16, 16, 2.0, 2.0, 0.0)), std::invalid_argument);
  EXPECT_THROW(mask_w(spec(16, 16, 2.0, std::nan(""))), std::invalid_argument);
  EXPECT_THROW(mask_h(spec(1, 16, 1.5, 2.0)), std::invalid_argument);
  EXPECT_NO_THROW(mask_h(spec(1, 16, 1.0, 2.0)));
}
