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

#include "gme/model/optim.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <thread>

#include "gme/common/error.hpp"

namespace gme::model {

Adam::Adam(std::size_t param_count, AdamConfig config)
    : config_(config), m_(param_count, 0.0), v_(param_count, 0.0) {}

void Adam::step(std::vector<double>& params, std::vector<double>& grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ConfigError("adam: parameter size mismatch");
  }
  if (config_.clip > 0.0) {
    double norm_sq = 0.0;
    for (double g : grads) norm_sq += g * g;
    double norm = std::sqrt(norm_sq);
    if (norm > config_.clip) {
      double s = config_.clip / norm;
      for (double& g : grads) g *= s;
    }
  }
  ++step_;
  double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i] * grads[i];
    double mhat = m_[i] / bc1;
    double vhat = v_[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
  }
}

void Adam::save(std::ostream& out) const {
  std::uint64_t n = m_.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&step_), sizeof(step_));
  out.write(reinterpret_cast<const char*>(m_.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
  out.write(reinterpret_cast<const char*>(v_.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
}

void Adam::load(std::istream& in) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (n != m_.size()) throw ConfigError("adam state size mismatch");
  in.read(reinterpret_cast<char*>(&step_), sizeof(step_));
  in.read(reinterpret_cast<char*>(m_.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(v_.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw IoError("truncated adam state");
}

bool PlateauScheduler::observe(double metric) {
  if (metric < best) {
    best = metric;
    stale = 0;
    return false;
  }
  ++stale;
  if (stale >= patience) {
    stale = 0;
    ++decays;
    lr *= factor;
    if (decays >= max_decays) return true;
  }
  return false;
}

BatchRunner::BatchRunner(std::size_t param_count, int threads)
    : param_count_(param_count), threads_(threads < 1 ? 1 : threads) {
  workspaces_.resize(static_cast<std::size_t>(threads_));
}

double BatchRunner::run(std::size_t batch_size, const ExampleFn& fn,
                        std::vector<double>& grad_out) {
  if (slot_grads_.size() < batch_size) slot_grads_.resize(batch_size);
  std::vector<double> losses(batch_size, 0.0);

  auto worker = [&](int worker_id, std::atomic<std::size_t>& next) {
    Workspace& ws = workspaces_[static_cast<std::size_t>(worker_id)];
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= batch_size) break;
      auto& buf = slot_grads_[i];
      buf.assign(param_count_, 0.0);
      losses[i] = fn(i, buf.data(), ws);
    }
  };

  std::atomic<std::size_t> next{0};
  int n_workers = std::min<int>(threads_, static_cast<int>(batch_size));
  if (n_workers <= 1) {
    worker(0, next);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker, w, std::ref(next));
    for (auto& t : pool) t.join();
  }

  grad_out.assign(param_count_, 0.0);
  double inv = 1.0 / static_cast<double>(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const auto& buf = slot_grads_[i];
    for (std::size_t k = 0; k < param_count_; ++k) grad_out[k] += buf[k];
  }
  for (std::size_t k = 0; k < param_count_; ++k) grad_out[k] *= inv;

  double loss = 0.0;
  for (std::size_t i = 0; i < batch_size; ++i) loss += losses[i];
  return loss * inv;
}

double BatchRunner::run_eval(std::size_t batch_size,
                             const std::function<double(std::size_t, Workspace&)>& fn) {
  if (batch_size == 0) return 0.0;
  std::vector<double> losses(batch_size, 0.0);
  auto worker = [&](int worker_id, std::atomic<std::size_t>& next) {
    Workspace& ws = workspaces_[static_cast<std::size_t>(worker_id)];
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= batch_size) break;
      losses[i] = fn(i, ws);
    }
  };
  std::atomic<std::size_t> next{0};
  int n_workers = std::min<int>(threads_, static_cast<int>(batch_size));
  if (n_workers <= 1) {
    worker(0, next);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker, w, std::ref(next));
    for (auto& t : pool) t.join();
  }
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(batch_size);
}

}  // namespace gme::model
