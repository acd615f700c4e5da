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

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "diffstride/harness/bench.hpp"
#include "diffstride/harness/config.hpp"
#include "diffstride/harness/cutoff.hpp"
#include "diffstride/harness/gradcheck.hpp"
#include "diffstride/harness/image.hpp"
#include "diffstride/harness/train.hpp"

namespace fs = std::filesystem;
using namespace diffstride;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file");
  cmd->add_option("--seed", c.seed, "Override the run seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

nlohmann::json read_json(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

harness::ExperimentConfig experiment_from(const Common& c, const nlohmann::json& j) {
  harness::ExperimentConfig config = harness::parse_config(j);
  if (c.seed) config.seed = *c.seed;
  if (!c.out.empty()) config.out_dir = c.out;
  config.threads = c.threads;
  return config;
}

int cmd_gradcheck(const Common& c) {
  harness::GradcheckConfig config = harness::parse_gradcheck_config(read_json(c.config));
  if (c.seed) config.seed = *c.seed;
  const harness::GradcheckReport report = harness::run_gradcheck(config);
  std::cout << report.table();
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream(fs::path(c.out) / "gradcheck.txt") << report.table();
  }
  return report.all_pass() ? 0 : 1;
}

int cmd_train(const Common& c) {
  const harness::ExperimentConfig config = experiment_from(c, read_json(c.config));
  const harness::TrainingResult result = harness::run_training(config);
  std::cout << harness::metrics_header(result.final_strides.size()) << '\n';
  for (const auto& row : result.rows) std::cout << harness::format_metrics_row(row) << '\n';
  return 0;
}

int cmd_sweep(const Common& c) {
  const nlohmann::json j = read_json(c.config);
  const harness::ExperimentConfig base =
      experiment_from(c, j.contains("base") ? j.at("base") : nlohmann::json::object());
  const harness::SweepSpec sweep =
      harness::parse_sweep(j.contains("sweep") ? j.at("sweep") : nlohmann::json::object());
  const auto runs = harness::run_sweep(base, sweep, c.threads);
  std::printf("run,kind,seed,lambda,init_s_h,init_s_w,final_acc,final_J\n");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    std::printf("%zu,%s,%llu,%g,%g,%g,%.4f,%.6g\n", i, r.kind.c_str(),
                static_cast<unsigned long long>(r.seed), r.lambda, r.stride_init.first,
                r.stride_init.second, r.result.final_acc, r.result.final_j);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learnable-stride spectral downsampling toolkit"};
  app.require_subcommand(1);

  Common gc, tc, sc, bc;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Run all finite-difference gradient checks");
  add_common(gradcheck, gc);
  CLI::App* train = app.add_subcommand("train", "Train one model and write metrics.csv");
  add_common(train, tc);
  CLI::App* sweep = app.add_subcommand("sweep", "Train a grid of configurations");
  add_common(sweep, sc);

  CLI::App* bench = app.add_subcommand("bench", "Time forward and backward of each downsampler");
  add_common(bench, bc);

  std::string in_path, out_path, mode = "diffstride-mask";
  double stride_h = 2.0, stride_w = 2.0, smoothness = 4.0;
  CLI::App* resize = app.add_subcommand("resize", "Resize a PGM/PPM image in the Fourier domain");
  resize->add_option("input", in_path, "Input P5/P6 image")->required()->check(CLI::ExistingFile);
  resize->add_option("output", out_path, "Output image")->required();
  resize->add_option("--stride-h", stride_h, "Vertical stride");
  resize->add_option("--stride-w", stride_w, "Horizontal stride");
  resize->add_option("-R,--smoothness", smoothness, "Taper width");
  resize->add_option("--mode", mode, "spectral | diffstride-mask")
      ->check(CLI::IsMember({"spectral", "diffstride-mask"}));

  double stride = 1.0, frame_rate = 100.0;
  CLI::App* cutoff = app.add_subcommand("cutoff", "Convert a stride to a cut-off frequency");
  cutoff->add_option("stride", stride, "Stride (>= 1)")->required();
  cutoff->add_option("--frame-rate", frame_rate, "Input frame rate in Hz");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gradcheck) return cmd_gradcheck(gc);
    if (*train) return cmd_train(tc);
    if (*sweep) return cmd_sweep(sc);
    if (*bench) {
      const harness::BenchConfig config = harness::parse_bench_config(read_json(bc.config));
      std::string csv = harness::bench_header() + "\n";
      for (const auto& row : harness::run_bench(config)) {
        csv += harness::format_bench_row(row, config.strides) + "\n";
      }
      std::cout << csv;
      if (!bc.out.empty()) {
        fs::create_directories(bc.out);
        std::ofstream(fs::path(bc.out) / "bench.csv") << csv;
      }
      return 0;
    }
    if (*resize) {
      const harness::Image img = harness::read_pnm(in_path);
      const harness::Image out = harness::resize_image(img, {stride_h, stride_w}, smoothness,
                                                       harness::parse_resize_mode(mode));
      harness::write_pnm(out_path, out);
      std::printf("%zux%zu -> %zux%zu\n", img.pixels.height(), img.pixels.width(),
                  out.pixels.height(), out.pixels.width());
      return 0;
    }
    if (*cutoff) {
      std::printf("%.6g\n", harness::stride_to_cutoff(stride, frame_rate));
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
