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

#include "diffstride/harness/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace diffstride::harness {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw std::invalid_argument(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

TaskConfig parse_task(const json& j) {
  reject_unknown(j, {"name", "seed", "n_train", "n_eval", "size", "classes", "bands",
                     "components", "noise"},
                 "task");
  TaskConfig t;
  read(j, "name", t.name);
  read(j, "seed", t.seed);
  read(j, "n_train", t.n_train);
  read(j, "n_eval", t.n_eval);
  read(j, "size", t.size);
  read(j, "classes", t.classes);
  read(j, "bands", t.bands);
  read(j, "components", t.components);
  read(j, "noise", t.noise);
  if (t.name != "bandlimited") {
    throw std::invalid_argument("task: unknown dataset '" + t.name + "'");
  }
  return t;
}

nn::ModelSpec parse_model(const json& j, const TaskConfig& task) {
  reject_unknown(j, {"kind", "channels", "kernel", "strides", "R", "pool", "shared_strides"},
                 "model");
  nn::ModelSpec m;
  m.input_height = m.input_width = task.size;
  m.input_channels = 1;
  m.classes = task.classes;
  if (j.contains("kind")) m.kind = nn::parse_downsample_kind(j.at("kind").get<std::string>());
  read(j, "channels", m.channels);
  read(j, "kernel", m.kernel);
  if (j.contains("strides")) {
    m.stride_init.clear();
    for (const auto& s : j.at("strides")) {
      if (!s.is_array() || s.size() != 2) {
        throw std::invalid_argument("model.strides: each entry must be [S_h, S_w]");
      }
      m.stride_init.emplace_back(s[0].get<double>(), s[1].get<double>());
    }
  }
  read(j, "R", m.smoothness);
  if (j.contains("pool")) m.pool = nn::parse_global_pool(j.at("pool").get<std::string>());
  read(j, "shared_strides", m.shared_strides);
  m.validate();
  return m;
}

nn::OptimizerConfig parse_optimizer(const json& j) {
  reject_unknown(j, {"name", "lr", "momentum", "weight_decay", "beta1", "beta2", "eps",
                     "stride_lr_scale"},
                 "optimizer");
  nn::OptimizerConfig o;
  read(j, "name", o.name);
  read(j, "lr", o.lr);
  read(j, "momentum", o.momentum);
  read(j, "weight_decay", o.weight_decay);
  read(j, "beta1", o.beta1);
  read(j, "beta2", o.beta2);
  read(j, "eps", o.eps);
  read(j, "stride_lr_scale", o.stride_lr_scale);
  if (o.name != "adam" && o.name != "sgd") {
    throw std::invalid_argument("optimizer: unknown name '" + o.name + "'");
  }
  return o;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  reject_unknown(j, {"task", "model", "optimizer", "lambda", "epochs", "batch_size", "seed",
                     "out_dir", "threads", "wall_clock"},
                 "config");
  ExperimentConfig c;
  if (j.contains("task")) c.task = parse_task(j.at("task"));
  c.model = parse_model(j.contains("model") ? j.at("model") : json::object(), c.task);
  if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer"));
  read(j, "lambda", c.lambda);
  read(j, "epochs", c.epochs);
  read(j, "batch_size", c.batch_size);
  read(j, "seed", c.seed);
  read(j, "out_dir", c.out_dir);
  read(j, "threads", c.threads);
  read(j, "wall_clock", c.wall_clock);
  if (c.lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
  if (c.batch_size == 0) throw std::invalid_argument("config: batch_size must be >= 1");
  if (c.threads == 0) throw std::invalid_argument("config: threads must be >= 1");
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  json strides = json::array();
  for (const auto& [sh, sw] : c.model.stride_init) strides.push_back({sh, sw});
  return json{
      {"task",
       {{"name", c.task.name},
        {"seed", c.task.seed},
        {"n_train", c.task.n_train},
        {"n_eval", c.task.n_eval},
        {"size", c.task.size},
        {"classes", c.task.classes},
        {"bands", c.task.bands},
        {"components", c.task.components},
        {"noise", c.task.noise}}},
      {"model",
       {{"kind", nn::to_string(c.model.kind)},
        {"channels", c.model.channels},
        {"kernel", c.model.kernel},
        {"strides", strides},
        {"R", c.model.smoothness},
        {"pool", nn::to_string(c.model.pool)},
        {"shared_strides", c.model.shared_strides}}},
      {"optimizer",
       {{"name", c.optimizer.name},
        {"lr", c.optimizer.lr},
        {"momentum", c.optimizer.momentum},
        {"weight_decay", c.optimizer.weight_decay},
        {"beta1", c.optimizer.beta1},
        {"beta2", c.optimizer.beta2},
        {"eps", c.optimizer.eps},
        {"stride_lr_scale", c.optimizer.stride_lr_scale}}},
      {"lambda", c.lambda},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"out_dir", c.out_dir},
      {"threads", c.threads},
      {"wall_clock", c.wall_clock}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(nlohmann::json::parse(in));
}

}  // namespace diffstride::harness
