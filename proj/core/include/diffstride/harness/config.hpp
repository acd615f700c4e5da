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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffstride/nn/model.hpp"
#include "diffstride/nn/optim.hpp"

namespace diffstride::harness {

/// Synthetic band-limited classification task.
struct TaskConfig {
  std::string name = "bandlimited";
  std::uint64_t seed = 1;
  std::size_t n_train = 2000;
  std::size_t n_eval = 500;
  std::size_t size = 16;
  std::size_t classes = 2;
  std::vector<std::vector<int>> bands{{1, 2}, {5, 6}};  // Chebyshev radii per class
  std::size_t components = 3;  // sinusoids per sample
  double noise = 0.1;          // Gaussian sigma
};

struct ExperimentConfig {
  TaskConfig task;
  nn::ModelSpec model;
  nn::OptimizerConfig optimizer;
  double lambda = 0.0;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;  // model init and shuffling
  std::string out_dir;
  std::size_t threads = 1;
  bool wall_clock = true;  // false writes wall_s = 0 for byte-stable CSVs
};

/// Parses the JSON experiment schema. Missing keys keep their defaults;
/// unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace diffstride::harness
