// Copyright 2026 The GME Authors.
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

#include "gme/model/trainer.hpp"

#include <cmath>

#include "gme/common/error.hpp"
#include "gme/common/rng.hpp"

namespace gme::model {

namespace {

// The visit for global sample slot `k` (k = step * batch + i).
Visit visit_for(std::uint64_t k, std::size_t n_train, std::uint64_t seed) {
  std::uint64_t epoch = k / n_train;
  std::uint64_t offset = k % n_train;
  // Per-epoch shuffled order, recomputed lazily and cached.
  thread_local std::uint64_t cached_epoch = ~0ull;
  thread_local std::uint64_t cached_seed = ~0ull;
  thread_local std::size_t cached_n = 0;
  thread_local std::vector<std::size_t> order;
  if (cached_epoch != epoch || cached_seed != seed || cached_n != n_train) {
    order = shuffled_indices(n_train, splitmix64(seed + 0x9e37u) ^ epoch);
    cached_epoch = epoch;
    cached_seed = seed;
    cached_n = n_train;
  }
  return {order[offset], epoch};
}

}  // namespace

TrainResult run_training(std::size_t n_train, std::vector<double>& params,
                         const ExampleGradFn& example_fn, const ValidationFn& validation_fn,
                         const OnBestFn& on_best, const TrainLoopConfig& config,
                         std::uint64_t start_step, Adam* resume_adam,
                         PlateauScheduler* resume_sched) {
  if (n_train == 0) throw PreconditionError("training requires a non-empty corpus");
  if (config.batch_size <= 0 || config.max_steps <= 0) {
    throw ConfigError("batch_size and max_steps must be positive");
  }

  AdamConfig adam_config;
  adam_config.clip = config.gradient_clip;
  Adam local_adam(params.size(), adam_config);
  Adam& adam = resume_adam ? *resume_adam : local_adam;

  PlateauScheduler local_sched;
  local_sched.lr = config.learning_rate;
  local_sched.patience = config.lr_patience;
  local_sched.max_decays = config.max_lr_decays;
  PlateauScheduler& sched = resume_sched ? *resume_sched : local_sched;

  BatchRunner runner(params.size(), config.threads);
  std::vector<double> grad(params.size());

  TrainResult result;
  result.best_metric = sched.best;

  auto validate = [&](std::uint64_t step) -> bool {
    double metric = validation_fn();
    result.validations.push_back({step, metric, sched.lr});
    if (metric < result.best_metric) {
      result.best_metric = metric;
      on_best(step, metric);
    }
    return sched.observe(metric);
  };

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const bool has_validation = config.eval_interval > 0;
  std::uint64_t step = start_step;
  bool stop = false;
  if (has_validation && start_step == 0) {
    stop = validate(0);  // baseline metric before any update
  }
  while (step < static_cast<std::uint64_t>(config.max_steps) && !stop) {
    std::uint64_t base = step * batch;
    double loss = runner.run(batch,
                             [&](std::size_t i, double* g, Workspace& ws) {
                               Visit v = visit_for(base + i, n_train, config.seed);
                               return example_fn(v, g, ws);
                             },
                             grad);
    if (!std::isfinite(loss)) {
      throw TrainingError("non-finite loss at step " + std::to_string(step));
    }
    adam.step(params, grad, sched.lr);
    ++step;
    result.loss_trace.emplace_back(step, loss);

    if (has_validation && step % static_cast<std::uint64_t>(config.eval_interval) == 0) {
      stop = validate(step);
    }
  }
  // Final validation unless one just ran.
  if (has_validation &&
      (step % static_cast<std::uint64_t>(config.eval_interval) != 0 ||
       result.validations.empty())) {
    validate(step);
  }
  result.steps_run = step;
  return result;
}

}  // namespace gme::model
