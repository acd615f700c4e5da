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

#include "diffstride/harness/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>

#include "diffstride/nn/optim.hpp"
#include "diffstride/regularizer.hpp"

namespace diffstride::harness {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::pair<double, double>> current_strides(const nn::Model& model) {
  std::vector<std::pair<double, double>> out;
  for (const auto& s : model.strides()) out.emplace_back(s.s_h, s.s_w);
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows,
               std::size_t layers) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << metrics_header(layers) << '\n';
  for (const MetricsRow& r : rows) out << format_metrics_row(r) << '\n';
}

// Sums per-example gradients of one batch. Examples are split across
// workers, but the reduction always walks examples in batch order.
double batch_gradients(const nn::Model& model, const Dataset& data,
                       std::span<const std::size_t> batch, std::size_t threads,
                       nn::Gradients& total) {
  const std::size_t n = batch.size();
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<nn::Gradients> per_example(n, nn::Gradients::like(model.params(),
                                                                model.strides().size()));
  std::vector<double> losses(n, 0.0);
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t idx = batch[i];
      losses[i] = model.loss_and_grad(data.images[idx], data.labels[idx], per_example[i], scale)
                      .loss;
    }
  };
  const std::size_t workers = std::min(threads, n);
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) continue;
      pool.emplace_back([&work, &errors, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  total.zero();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total.add(per_example[i]);
    loss += losses[i];
  }
  return loss;
}

}  // namespace

std::string metrics_header(std::size_t layers) {
  std::string h = "epoch,loss,acc,J";
  for (std::size_t l = 1; l <= layers; ++l) {
    h += ",s_h_" + std::to_string(l) + ",s_w_" + std::to_string(l);
  }
  return h + ",wall_s";
}

std::string format_metrics_row(const MetricsRow& r) {
  std::string line = std::to_string(r.epoch) + "," + fmt(r.loss) + "," + fmt(r.acc) + "," + fmt(r.j);
  for (const auto& [sh, sw] : r.strides) line += "," + fmt(sh) + "," + fmt(sw);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", r.wall_s);
  return line + "," + buf;
}

BandlimitedSpec train_split(const TaskConfig& task) {
  return BandlimitedSpec{task.seed, task.n_train, task.size, task.classes,
                         task.bands, task.components, task.noise};
}

BandlimitedSpec eval_split(const TaskConfig& task) {
  // Independent stream for held-out data.
  BandlimitedSpec s = train_split(task);
  s.seed = task.seed ^ 0x9e3779b97f4a7c15ULL;
  s.n = task.n_eval;
  return s;
}

double evaluate(const nn::Model& model, const Dataset& data) {
  if (data.images.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    if (model.predict(data.images[i]) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.images.size());
}

TrainingResult run_training(const ExperimentConfig& config) {
  const Dataset train = gen_bandlimited_dataset(train_split(config.task));
  const Dataset eval = gen_bandlimited_dataset(eval_split(config.task));
  if (train.images.empty()) throw std::invalid_argument("run_training: empty training set");

  nn::Model model(config.model, config.seed);
  nn::Optimizer optimizer(config.optimizer, model.params(), model.strides().size());
  nn::Gradients grads = nn::Gradients::like(model.params(), model.strides().size());
  const std::size_t layers = model.strides().size();

  std::filesystem::path out_dir;
  if (!config.out_dir.empty()) {
    out_dir = config.out_dir;
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir / "config.json") << to_json(config).dump(2) << '\n';
  }

  std::mt19937_64 shuffle_rng(config.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<std::size_t> order(train.images.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainingResult result;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng() % i]);
    }
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t end = std::min(order.size(), b + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + b, end - b);
      const auto abort_run = [&](const std::string& what) {
        if (!out_dir.empty()) write_csv(out_dir / "metrics.csv", result.rows, layers);
        throw std::runtime_error("run_training: non-finite " + what + " at epoch " +
                                 std::to_string(epoch) + ", batch starting at " +
                                 std::to_string(b));
      };
      double batch_loss = 0.0;
      try {
        batch_loss = batch_gradients(model, train, batch, config.threads, grads);
      } catch (const std::invalid_argument& e) {
        // Shapes are fixed at construction, so this is a non-finite activation
        // rejected by the transform.
        abort_run(std::string("activation (") + e.what() + ")");
      }
      if (!std::isfinite(batch_loss)) abort_run("loss");
      loss_sum += batch_loss;

      if (model.learns_strides()) {
        const auto dj = regularizer::j_gradient(model.stride_stack());
        for (std::size_t l = 0; l < layers; ++l) {
          layer::StrideParams& s = model.strides()[l];
          s.zero_grad();
          s.accumulate(grads.strides[l].first + config.lambda * dj[l].first,
                       grads.strides[l].second + config.lambda * dj[l].second);
        }
      }
      optimizer.step(model.params(), grads.params, model.strides(), model.learns_strides());
      if (model.learns_strides()) model.project_strides();
      for (const nn::Parameter& p : model.params()) {
        for (double v : p.value) {
          if (!std::isfinite(v)) abort_run("parameter '" + p.name + "'");
        }
      }
    }

    MetricsRow row;
    row.epoch = epoch;
    row.loss = loss_sum / static_cast<double>(order.size());
    row.acc = evaluate(model, eval);
    row.j = regularizer::j_value(model.stride_stack());
    row.strides = current_strides(model);
    if (config.wall_clock) {
      row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    result.rows.push_back(std::move(row));
    if (!out_dir.empty()) write_csv(out_dir / "metrics.csv", result.rows, layers);
  }

  result.final_strides = current_strides(model);
  result.final_j = regularizer::j_value(model.stride_stack());
  result.final_acc = result.rows.empty() ? evaluate(model, eval) : result.rows.back().acc;
  if (!out_dir.empty()) nn::save_checkpoint(out_dir / "checkpoint", model.to_arrays());
  return result;
}

SweepSpec parse_sweep(const nlohmann::json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key != "lambdas" && key != "seeds" && key != "kinds" && key != "stride_inits") {
      throw std::invalid_argument("sweep: unknown key '" + key + "'");
    }
  }
  SweepSpec s;
  if (j.contains("lambdas")) s.lambdas = j.at("lambdas").get<std::vector<double>>();
  if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("kinds")) s.kinds = j.at("kinds").get<std::vector<std::string>>();
  if (j.contains("stride_inits")) {
    for (const auto& p : j.at("stride_inits")) {
      s.stride_inits.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
  }
  return s;
}

std::vector<SweepRun> run_sweep(const ExperimentConfig& base, const SweepSpec& sweep,
                                std::size_t threads) {
  const std::vector<std::string> kinds =
      sweep.kinds.empty() ? std::vector<std::string>{nn::to_string(base.model.kind)} : sweep.kinds;
  const std::vector<std::uint64_t> seeds =
      sweep.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : sweep.seeds;
  const std::vector<double> lambdas =
      sweep.lambdas.empty() ? std::vector<double>{base.lambda} : sweep.lambdas;
  std::vector<std::optional<std::pair<double, double>>> inits;
  if (sweep.stride_inits.empty()) {
    inits.push_back(std::nullopt);
  } else {
    for (const auto& p : sweep.stride_inits) inits.emplace_back(p);
  }

  std::vector<SweepRun> runs;
  std::vector<ExperimentConfig> configs;
  for (const auto& kind : kinds) {
    for (const auto& init : inits) {
      for (double lambda : lambdas) {
        for (std::uint64_t seed : seeds) {
          ExperimentConfig c = base;
          c.model.kind = nn::parse_downsample_kind(kind);
          if (init) std::fill(c.model.stride_init.begin(), c.model.stride_init.end(), *init);
          c.lambda = lambda;
          c.seed = seed;
          c.threads = 1;
          if (!base.out_dir.empty()) {
            c.out_dir = (std::filesystem::path(base.out_dir) /
                         ("run_" + std::to_string(configs.size())))
                            .string();
          }
          SweepRun r;
          r.kind = nn::to_string(c.model.kind);
          r.seed = seed;
          r.lambda = lambda;
          r.stride_init = c.model.stride_init.front();
          runs.push_back(std::move(r));
          configs.push_back(std::move(c));
        }
      }
    }
  }

  std::size_t next = 0;
  std::mutex mu;
  std::exception_ptr failure;
  const auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= configs.size() || failure) return;
        i = next++;
      }
      try {
        runs[i].result = run_training(configs[i]);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, configs.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  if (!base.out_dir.empty()) {
    std::filesystem::create_directories(base.out_dir);
    std::ofstream out(std::filesystem::path(base.out_dir) / "summary.csv", std::ios::trunc);
    out << "run,kind,seed,lambda,init_s_h,init_s_w,final_acc,final_J";
    const std::size_t layers = base.model.stride_init.size();
    for (std::size_t l = 1; l <= layers; ++l) out << ",s_h_" << l << ",s_w_" << l;
    out << '\n';
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const SweepRun& r = runs[i];
      out << i << ',' << r.kind << ',' << r.seed << ',' << fmt(r.lambda) << ','
          << fmt(r.stride_init.first) << ',' << fmt(r.stride_init.second) << ','
          << fmt(r.result.final_acc) << ',' << fmt(r.result.final_j);
      for (const auto& [sh, sw] : r.result.final_strides) out << ',' << fmt(sh) << ',' << fmt(sw);
      out << '\n';
    }
  }
  return runs;
}

}  // namespace diffstride::harness
