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

#ifndef GME_MODEL_OPTIM_HPP_
#define GME_MODEL_OPTIM_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include "gme/model/transformer.hpp"

namespace gme::model {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip = 1.0;  // global gradient-norm clip; <= 0 disables
};

class Adam {
 public:
  Adam(std::size_t param_count, AdamConfig config);

  // Clips grads to the configured global norm, then applies one update.
  void step(std::vector<double>& params, std::vector<double>& grads, double lr);

  std::uint64_t step_count() const { return step_; }

  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  AdamConfig config_;
  std::vector<double> m_, v_;
  std::uint64_t step_ = 0;
};

// Halves the learning rate after `patience` validations without improvement;
// signals termination after `max_decays` halvings. Metrics are
// smaller-is-better.
struct PlateauScheduler {
  double lr = 5e-5;
  int patience = 2;
  int max_decays = 3;
  double factor = 0.5;

  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  int decays = 0;

  // Returns true when training should stop.
  bool observe(double metric);
};

// Evaluates per-example losses/gradients on worker threads and reduces the
// gradients in example order, so the result is bit-identical for any thread
// count. Worker state (gradient buffer + workspace) is reused across batches.
class BatchRunner {
 public:
  BatchRunner(std::size_t param_count, int threads);

  using ExampleFn = std::function<double(std::size_t index, double* grad, Workspace& ws)>;

  // Runs fn for indices [0, batch_size); returns the mean loss and writes the
  // mean gradient into grad_out (sized param_count).
  double run(std::size_t batch_size, const ExampleFn& fn, std::vector<double>& grad_out);

  // Loss-only variant (no gradient output buffers).
  double run_eval(std::size_t batch_size,
                  const std::function<double(std::size_t, Workspace&)>& fn);

  int threads() const { return threads_; }

 private:
  std::size_t param_count_;
  int threads_;
  std::vector<std::vector<double>> slot_grads_;
  std::vector<Workspace> workspaces_;
};

}  // namespace gme::model

#endif  // GME_MODEL_OPTIM_HPP_
