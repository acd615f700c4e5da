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
#include <string>
#include <utility>
#include <vector>

#include "diffstride/harness/config.hpp"
#include "diffstride/harness/dataset.hpp"

namespace diffstride::harness {

/// One line of the metrics CSV.
struct MetricsRow {
  std::size_t epoch = 0;
  double loss = 0.0;  // mean task (cross-entropy) loss over the epoch
  double acc = 0.0;   // eval accuracy in [0, 1] after the epoch
  double j = 0.0;     // complexity proxy of the strides after the epoch
  std::vector<std::pair<double, double>> strides;
  double wall_s = 0.0;
};

/// `epoch,loss,acc,J,s_h_1,s_w_1,...,s_h_L,s_w_L,wall_s`
std::string metrics_header(std::size_t layers);
std::string format_metrics_row(const MetricsRow& row);

struct TrainingResult {
  std::vector<MetricsRow> rows;
  double final_acc = 0.0;
  double final_j = 0.0;
  std::vector<std::pair<double, double>> final_strides;
};

BandlimitedSpec train_split(const TaskConfig& task);
BandlimitedSpec eval_split(const TaskConfig& task);

double evaluate(const nn::Model& model, const Dataset& data);

/// Trains the configured model with loss = mean CE + lambda * J (the J term
/// only moves strides of a diffstride model). When `out_dir` is set, writes
/// metrics.csv, config.json and checkpoint.{bin,json} there. A non-finite
/// loss aborts with std::runtime_error after flushing the rows so far.
TrainingResult run_training(const ExperimentConfig& config);

/// Variations of a base config run one after another.
struct SweepSpec {
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<double, double>> stride_inits;  // applied to every layer
  std::vector<std::string> kinds;
};

SweepSpec parse_sweep(const nlohmann::json& j);

struct SweepRun {
  std::string kind;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  std::pair<double, double> stride_init;
  TrainingResult result;
};

/// Runs the cartesian product of the non-empty sweep axes. Each run writes
/// to `<base.out_dir>/run_<index>` when an output directory is set, and a
/// summary.csv lands in `base.out_dir`. Runs are spread over `threads`
/// workers; every run stays deterministic on its own.
std::vector<SweepRun> run_sweep(const ExperimentConfig& base, const SweepSpec& sweep,
                                std::size_t threads = 1);

}  // namespace diffstride::harness
