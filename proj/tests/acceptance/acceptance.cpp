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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "diffstride/harness/config.hpp"
#include "diffstride/harness/train.hpp"
#include "diffstride/layer.hpp"
#include "diffstride/masking.hpp"
#include "diffstride/regularizer.hpp"
#include "diffstride/residual_block.hpp"
#include "diffstride/spectrum.hpp"
#include "oracles.hpp"

using namespace diffstride;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using Rng = std::mt19937_64;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double rel_error(std::span<const double> a, std::span<const double> b, double floor = 1e-12) {
  const double scale = std::max({oracle::max_abs(a), oracle::max_abs(b), floor});
  return oracle::max_abs_diff(a, b) / scale;
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

bool report(int id, const std::string& name, Outcome& o) {
  std::printf("criterion %d %-28s %s%s\n", id, name.c_str(), o.pass ? "PASS" : "FAIL",
              o.detail.str().c_str());
  std::fflush(stdout);
  return o.pass;
}

// 1 -------------------------------------------------------------------------

Outcome transform_correctness() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst_round = 0.0, worst_parseval = 0.0, worst_oracle = 0.0;
  bool parity_seen[2][2] = {};
  for (int k = 0; k < 200; ++k) {
    // Sweep every parity pair explicitly, then random sizes up to 33.
    std::size_t H = uniform_size(rng, 1, 33);
    std::size_t W = uniform_size(rng, 1, 33);
    if (k < 4) {
      H = 32 + (k & 1);
      W = 32 + ((k >> 1) & 1);
    }
    parity_seen[H % 2][W % 2] = true;
    const RealTensor x = oracle::random_tensor(rng, Shape3{H, W, uniform_size(rng, 1, 3)});
    const spectrum::HalfSpectrum y = spectrum::forward(x);
    const RealTensor back = spectrum::inverse(y);
    double err2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = back.data()[i] - x.data()[i];
      err2 += d * d;
    }
    worst_round = std::max(worst_round, std::sqrt(err2 / x.squared_norm()));
    worst_parseval = std::max(
        worst_parseval, std::abs(spectrum::weighted_energy(y) - x.squared_norm()) / x.squared_norm());

    for (std::size_t c = 0; c < x.channels(); ++c) {
      const oracle::Grid g = oracle::dft(x, c);
      double scale = 0.0, diff = 0.0;
      for (std::size_t r = 0; r < y.height(); ++r) {
        const std::size_t k1 = oracle::residue(y.row_frequency(r), H);
        for (std::size_t n = 0; n < y.half_width(); ++n) {
          scale = std::max(scale, std::abs(g.at(k1, n)));
          diff = std::max(diff, std::abs(g.at(k1, n) - y(r, n, c)));
        }
      }
      worst_oracle = std::max(worst_oracle, diff / std::max(scale, 1e-300));
    }
  }
  const double elapsed = seconds_since(t0);
  o.detail << " round_trip=" << worst_round << " parseval=" << worst_parseval
           << " direct_dft=" << worst_oracle << " time=" << elapsed << "s";
  o.require(worst_round <= 1e-10, "round trip");
  o.require(worst_parseval <= 1e-10, "parseval");
  o.require(worst_oracle <= 1e-10, "direct dft");
  o.require(parity_seen[0][0] && parity_seen[0][1] && parity_seen[1][0] && parity_seen[1][1],
            "parity coverage");
  o.require(elapsed < 10.0, "runtime");
  return o;
}

// 2 -------------------------------------------------------------------------

// Largest admissible stride not above `s` for an axis of `size` samples.
double feasible(double s, std::size_t size) {
  return size == 1 ? 1.0 : std::min(s, static_cast<double>(size) - 0.25);
}

masking::MaskSpec feasible_spec(std::size_t H, std::size_t W, double R, double sh, double sw) {
  return masking::MaskSpec{H, W, R, feasible(sh, H), feasible(sw, W)};
}

Outcome mask_correctness() {
  Outcome o;
  const auto t0 = Clock::now();

  // Worked horizontal taper on W=16: columns 5..8 step down by 1/4. The
  // closing zero falls at column 9, one past the stored half spectrum.
  const masking::MaskSpec worked{16, 16, 4.0, 2.0, 2.0};
  const std::vector<double> mw = masking::mask_w(worked);
  const double taper[4] = {1.0, 0.75, 0.5, 0.25};
  o.require(mw.size() == 9, "worked taper length");
  for (int i = 0; i < 4 && mw.size() == 9; ++i) o.require(mw[5 + i] == taper[i], "worked taper");
  o.require(oracle::window(worked, 0, 9) == 0.0, "worked taper zero");

  // Direct substitution on a grid.
  double worst_grid = 0.0;
  for (std::size_t H : {1u, 2u, 7u, 16u, 17u, 32u, 33u}) {
    for (std::size_t W : {1u, 4u, 9u, 16u, 31u, 32u}) {
      for (double S : {1.0, 1.3, 2.0, 2.6, 3.1, 5.0}) {
        for (double R : {0.5, 1.0, 2.0, 4.0, 8.0}) {
          const masking::MaskSpec spec = feasible_spec(H, W, R, S, S * 1.1);
          const masking::CropMask m = masking::build_crop_mask(spec);
          for (std::size_t r = 0; r < m.rows; ++r) {
            for (std::size_t n = 0; n < m.cols; ++n) {
              const long fv = static_cast<long>(r) - static_cast<long>(H / 2);
              worst_grid = std::max(
                  worst_grid, std::abs(m(r, n) - oracle::window(spec, fv, static_cast<long>(n))));
            }
          }
        }
      }
    }
  }
  o.require(worst_grid <= 1e-15, "direct substitution");

  // Properties on random specs.
  Rng rng(202);
  bool rank1 = true, symmetric = true, monotone = true, bounded = true, stride_monotone = true;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t H = uniform_size(rng, 1, 64);
    const std::size_t W = uniform_size(rng, 1, 64);
    const masking::MaskSpec spec =
        feasible_spec(H, W, uniform(rng, 0.5, 8.0), uniform(rng, 1.0, 6.0), uniform(rng, 1.0, 6.0));
    const masking::CropMask m = masking::build_crop_mask(spec);
    const std::size_t c = spec.height / 2;
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t n = 0; n < m.cols; ++n) {
        rank1 &= m(r, n) == m.vertical[r] * m.horizontal[n];
        bounded &= m(r, n) >= 0.0 && m(r, n) <= 1.0;
      }
    }
    for (std::size_t d = 1; c + d < m.rows && d <= c; ++d) {
      symmetric &= m.vertical[c + d] == m.vertical[c - d];
    }
    for (std::size_t r = 0; r < m.rows; ++r) {
      if (r < c) monotone &= m.vertical[r] <= m.vertical[r + 1];
      if (r > c) monotone &= m.vertical[r] <= m.vertical[r - 1];
    }
    for (std::size_t n = 1; n < m.cols; ++n) monotone &= m.horizontal[n] <= m.horizontal[n - 1];

    const masking::MaskSpec coarser =
        feasible_spec(H, W, spec.smoothness, spec.stride_h + 0.5, spec.stride_w + 0.5);
    const masking::CropMask mc = masking::build_crop_mask(coarser);
    for (std::size_t i = 0; i < m.values.size(); ++i) stride_monotone &= mc.values[i] <= m.values[i];
  }
  o.require(rank1, "rank-1");
  o.require(symmetric, "symmetry");
  o.require(monotone, "monotone in |f|");
  o.require(bounded, "range [0,1]");
  o.require(stride_monotone, "monotone in S");

  const double elapsed = seconds_since(t0);
  o.detail << " grid_err=" << worst_grid << " time=" << elapsed << "s";
  o.require(elapsed < 5.0, "runtime");
  return o;
}

// 3 -------------------------------------------------------------------------

double readout(const RealTensor& y, const RealTensor& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += w.data()[i] * y.data()[i] + 0.5 * y.data()[i] * y.data()[i];
  return s;
}

RealTensor readout_grad(const RealTensor& y, const RealTensor& w) {
  RealTensor g(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) g.data()[i] = w.data()[i] + y.data()[i];
  return g;
}

Outcome stride_gradient() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(303);
  const double eps = 1e-5;
  double worst_stride = 0.0, worst_input = 0.0;
  for (int k = 0; k < 50; ++k) {
    Shape3 shape{uniform_size(rng, 6, 20), uniform_size(rng, 6, 20), uniform_size(rng, 1, 2)};
    double R = uniform(rng, 1.0, 6.0);
    if (k == 0) {
      shape = Shape3{32, 32, 1};
      R = 4.0;
    }
    layer::StrideParams p(uniform(rng, 1.0, 4.0), uniform(rng, 1.0, 4.0), shape.height, shape.width);
    if (k == 0) {
      p.s_h = 2.6;
      p.s_w = 3.1;
    }
    p = layer::project_strides(p);
    const RealTensor x = oracle::random_tensor(rng, shape);

    auto fwd = layer::diffstride_forward(x, p, R);
    const masking::TargetShape base = fwd.context.output;
    const RealTensor w = oracle::random_tensor(rng, fwd.output.shape());
    const layer::DiffStrideGrads g = layer::diffstride_vjp(readout_grad(fwd.output, w), fwd.context);

    double s[2] = {p.s_h, p.s_w};
    const std::vector<double> ns = oracle::central_diff(s, eps, [&] {
      layer::StrideParams q = p;
      q.s_h = s[0];
      q.s_w = s[1];
      return readout(layer::diffstride_forward(x, q, R, base).output, w);
    });
    const double as[2] = {g.stride_h, g.stride_w};
    worst_stride = std::max(worst_stride, rel_error(as, ns));

    RealTensor xv = x;
    const std::vector<double> nx = oracle::central_diff(xv.data(), eps, [&] {
      return readout(layer::diffstride_forward(xv, p, R).output, w);
    });
    worst_input = std::max(worst_input, rel_error(g.input.data(), nx));
  }
  const double elapsed = seconds_since(t0);
  o.detail << " stride_rel=" << worst_stride << " input_rel=" << worst_input << " time=" << elapsed
           << "s";
  o.require(worst_stride <= 1e-5, "stride gradient");
  o.require(worst_input <= 1e-6, "input gradient");
  o.require(elapsed < 30.0, "runtime");
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome regularizer_checks() {
  Outcome o;
  o.require(regularizer::j_value({{{2.0, 2.0}, {2.0, 2.0}}}) == 0.3125, "J([(2,2),(2,2)])");
  Rng rng(404);
  double worst = 0.0, worst_value = 0.0;
  bool negative = true;
  for (int k = 0; k < 500; ++k) {
    const std::size_t L = uniform_size(rng, 1, 5);
    std::vector<double> flat;
    for (std::size_t l = 0; l < 2 * L; ++l) flat.push_back(uniform(rng, 1.0, 4.0));
    const auto stack_of = [&] {
      regularizer::StrideStack s;
      for (std::size_t l = 0; l < L; ++l) s.strides.emplace_back(flat[2 * l], flat[2 * l + 1]);
      return s;
    };
    const regularizer::StrideStack stack = stack_of();
    worst_value = std::max(worst_value, std::abs(regularizer::j_value(stack) - oracle::j_naive(stack.strides)));
    std::vector<double> analytic;
    for (const auto& [gh, gw] : regularizer::j_gradient(stack)) {
      analytic.push_back(gh);
      analytic.push_back(gw);
      negative &= gh < 0.0 && gw < 0.0;
    }
    const std::vector<double> numeric =
        oracle::central_diff(flat, 1e-5, [&] { return regularizer::j_value(stack_of()); });
    worst = std::max(worst, rel_error(analytic, numeric));
  }
  o.detail << " fd_rel=" << worst << " naive_abs=" << worst_value;
  o.require(worst <= 1e-8, "gradient fd");
  o.require(worst_value <= 1e-15, "value vs naive");
  o.require(negative, "negative partials");
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome lowpass_property() {
  Outcome o;
  Rng rng(505);
  double worst_leak = 0.0, worst_gain = 0.0;
  for (int k = 0; k < 300; ++k) {
    const Shape3 shape{uniform_size(rng, 2, 40), uniform_size(rng, 2, 40), uniform_size(rng, 1, 3)};
    const masking::MaskSpec spec{shape.height, shape.width, uniform(rng, 0.5, 8.0),
                                 uniform(rng, 1.0, 5.0), uniform(rng, 1.0, 5.0)};
    layer::StrideParams p = layer::project_strides(
        layer::StrideParams(spec.stride_h, spec.stride_w, shape.height, shape.width));
    masking::MaskSpec used = spec;
    used.stride_h = p.s_h;
    used.stride_w = p.s_w;
    const RealTensor x = oracle::random_tensor(rng, shape);
    const RealTensor y = layer::diffstride_forward(x, p, spec.smoothness).output;

    const spectrum::HalfSpectrum Y = spectrum::forward(y);
    double leak = 0.0;
    for (std::size_t r = 0; r < Y.height(); ++r) {
      for (std::size_t n = 0; n < Y.half_width(); ++n) {
        if (oracle::window(used, Y.row_frequency(r), static_cast<long>(n)) != 0.0) continue;
        for (std::size_t c = 0; c < Y.channels(); ++c) leak += Y.column_weight(n) * std::norm(Y(r, n, c));
      }
    }
    const double total = spectrum::weighted_energy(Y);
    if (total > 0.0) worst_leak = std::max(worst_leak, leak / total);
    worst_gain = std::max(worst_gain, y.squared_norm() / x.squared_norm());
  }
  o.detail << " leak_ratio=" << worst_leak << " max_energy_ratio=" << worst_gain;
  o.require(worst_leak <= 1e-12, "mask-zero energy");
  o.require(worst_gain <= 1.0 + 1e-12, "energy non-increasing");
  return o;
}

// 6, 7 ----------------------------------------------------------------------

harness::ExperimentConfig task_config() {
  harness::ExperimentConfig c;
  c.task.size = 16;
  c.task.n_train = 2000;
  c.task.n_eval = 500;
  c.task.bands = {{3, 4}, {6, 7}};
  c.model.input_height = c.model.input_width = 16;
  c.model.channels = {8, 8};
  c.epochs = 3;
  c.batch_size = 32;
  c.wall_clock = false;
  return c;
}

harness::TrainingResult train_timed(const harness::ExperimentConfig& c, double& worst_seconds) {
  const auto t0 = Clock::now();
  harness::TrainingResult r = harness::run_training(c);
  worst_seconds = std::max(worst_seconds, seconds_since(t0));
  return r;
}

Outcome recovery_from_bad_init() {
  Outcome o;
  double worst_seconds = 0.0;
  double ds_total = 0.0, sp_total = 0.0, ds_max = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    double spread[2];
    for (int kind = 0; kind < 2; ++kind) {
      double acc[2];
      for (int init = 0; init < 2; ++init) {
        harness::ExperimentConfig c = task_config();
        c.seed = seed;
        c.task.seed = seed;
        c.model.kind = kind == 0 ? nn::DownsampleKind::kDiffStride : nn::DownsampleKind::kSpectral;
        const double s = init == 0 ? 3.0 : 1.5;
        c.model.stride_init = {{s, s}, {s, s}};
        acc[init] = train_timed(c, worst_seconds).final_acc;
      }
      spread[kind] = std::abs(acc[0] - acc[1]);
      o.detail << " seed" << seed << (kind == 0 ? ".diffstride=" : ".spectral=") << acc[0] << "/"
               << acc[1];
    }
    ds_total += spread[0];
    sp_total += spread[1];
    ds_max = std::max(ds_max, spread[0]);
  }
  o.detail << " mean_spread diffstride=" << ds_total / 3 << " spectral=" << sp_total / 3
           << " slowest_run=" << worst_seconds << "s";
  o.require(ds_max <= 0.03, "diffstride within 3 points");
  o.require(ds_total < sp_total, "diffstride spread smaller");
  o.require(worst_seconds <= 300.0, "per-run budget");
  return o;
}

Outcome lambda_tradeoff() {
  Outcome o;
  double medians[3];
  const double lambdas[3] = {0.0, 0.5, 5.0};
  for (int i = 0; i < 3; ++i) {
    std::vector<double> js;
    double unused = 0.0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      harness::ExperimentConfig c = task_config();
      c.seed = seed;
      c.task.seed = seed;
      c.lambda = lambdas[i];
      js.push_back(train_timed(c, unused).final_j);
    }
    std::sort(js.begin(), js.end());
    medians[i] = js[1];
    o.detail << " lambda=" << lambdas[i] << ":J_median=" << medians[i];
  }
  o.require(medians[1] <= medians[0] && medians[2] <= medians[1], "non-increasing J");
  return o;
}

// 8 -------------------------------------------------------------------------

Outcome identity_and_shapes() {
  Outcome o;
  Rng rng(808);
  double worst_identity = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Shape3 shape{uniform_size(rng, 1, 33), uniform_size(rng, 1, 33), uniform_size(rng, 1, 3)};
    const RealTensor x = oracle::random_tensor(rng, shape);
    const RealTensor y =
        layer::diffstride_forward(x, layer::StrideParams(1.0, 1.0, shape.height, shape.width), 4.0)
            .output;
    if (y.shape() != x.shape()) {
      o.require(false, "identity shape");
      continue;
    }
    worst_identity = std::max(worst_identity, rel_error(y.data(), x.data()));
  }
  o.require(worst_identity <= 1e-10, "identity");

  const RealTensor x32 = oracle::random_tensor(rng, Shape3{32, 32, 1});
  o.require(layer::diffstride_forward(x32, layer::StrideParams(2.0, 2.0, 32, 32), 4.0).output.shape() ==
                Shape3{24, 24, 1},
            "32x32 S=2 R=4 -> 24x24");
  o.require(layer::spectral_pool(x32, {2.0, 2.0}).shape() == Shape3{16, 16, 1},
            "spectral pool 32x32 S=2 -> 16x16");

  std::size_t mismatches = 0;
  for (int k = 0; k < 500; ++k) {
    const Shape3 shape{uniform_size(rng, 4, 32), uniform_size(rng, 4, 32), 2};
    const double s = uniform(rng, 1.0, 3.0);
    layer::StrideParams p =
        layer::project_strides(layer::StrideParams(s, s, shape.height, shape.width, true));
    layer::ResidualBlockWeights w{
        nn::Parameter{"main", {3, 3, 2, 3}, oracle::random_tensor(rng, Shape3{54, 1, 1}).storage()},
        nn::Parameter{"skip", {1, 1, 2, 3}, oracle::random_tensor(rng, Shape3{6, 1, 1}).storage()}};
    try {
      const auto out = layer::residual_block_forward(oracle::random_tensor(rng, shape), w, p,
                                                     uniform(rng, 1.0, 6.0));
      if (out.main_shape != out.skip_shape) ++mismatches;
    } catch (const std::logic_error&) {
      ++mismatches;
    }
  }
  o.detail << " identity_rel=" << worst_identity << " residual_mismatches=" << mismatches;
  o.require(mismatches == 0, "residual branch shapes");
  return o;
}

// 9 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    harness::ExperimentConfig c = task_config();
    c.task.n_train = 400;
    c.task.n_eval = 100;
    c.seed = 9;
    c.lambda = 0.5;
    c.threads = 1;
    c.out_dir = (fs::temp_directory_path() / ("diffstride_accept_det_" + std::to_string(i))).string();
    fs::remove_all(c.out_dir);
    harness::run_training(c);
    csv[i] = slurp(fs::path(c.out_dir) / "metrics.csv");
    fs::remove_all(c.out_dir);
  }
  o.detail << " bytes=" << csv[0].size();
  o.require(!csv[0].empty() && csv[0] == csv[1], "byte-identical metrics");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> all{
      {1, "transform-correctness", transform_correctness},
      {2, "mask-correctness", mask_correctness},
      {3, "stride-gradient", stride_gradient},
      {4, "regularizer", regularizer_checks},
      {5, "low-pass", lowpass_property},
      {6, "recovery-from-bad-init", recovery_from_bad_init},
      {7, "lambda-tradeoff", lambda_tradeoff},
      {8, "identity-and-shapes", identity_and_shapes},
      {9, "determinism", determinism},
  };
  // Optional arguments select criteria by number.
  std::vector<Entry> criteria;
  for (const Entry& e : all) {
    bool wanted = argc == 1;
    for (int i = 1; i < argc; ++i) wanted |= std::atoi(argv[i]) == e.id;
    if (wanted) criteria.push_back(e);
  }
  int failures = 0;
  for (const Entry& e : criteria) {
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail << " [exception: " << ex.what() << "]";
    }
    if (!report(e.id, e.name, o)) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
