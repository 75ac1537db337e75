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

#ifndef GME_MODEL_TRAINER_HPP_
#define GME_MODEL_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gme/model/optim.hpp"

namespace gme::model {

struct TrainLoopConfig {
  int batch_size = 32;
  double learning_rate = 5e-5;
  int max_steps = 1000;
  int eval_interval = 500;
  double gradient_clip = 1.0;
  int lr_patience = 2;   // validations without improvement before a decay
  int max_lr_decays = 3; // training stops after this many halvings
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ValidationRecord {
  std::uint64_t step = 0;
  double metric = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  std::uint64_t steps_run = 0;
  double best_metric = 0.0;
  std::vector<std::pair<std::uint64_t, double>> loss_trace;  // (step, batch loss)
  std::vector<ValidationRecord> validations;
};

// Data visits are deterministic functions of (seed, step): epoch order comes
// from a per-epoch shuffle, so a resumed run replays the identical schedule.
// example_fn returns the per-sample loss and writes its gradient; visit.epoch
// lets callers resample per-epoch artifacts such as templates.
struct Visit {
  std::size_t data_index = 0;
  std::uint64_t epoch = 0;
};

using ExampleGradFn = std::function<double(const Visit&, double* grad, Workspace& ws)>;
// Smaller-is-better validation metric.
using ValidationFn = std::function<double()>;
// Called when validation improves; snapshot the parameters here.
using OnBestFn = std::function<void(std::uint64_t step, double metric)>;

TrainResult run_training(std::size_t n_train, std::vector<double>& params,
                         const ExampleGradFn& example_fn, const ValidationFn& validation_fn,
                         const OnBestFn& on_best, const TrainLoopConfig& config,
                         std::uint64_t start_step = 0, Adam* resume_adam = nullptr,
                         PlateauScheduler* resume_sched = nullptr);

}  // namespace gme::model

#endif  // GME_MODEL_TRAINER_HPP_
