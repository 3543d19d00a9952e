// Copyright 2026 The Authors.
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

#include <cmath>
#include <vector>

#include "gdpnet/matrix.hpp"

namespace gdpnet {

enum class Direction { kMinimize, kMaximize };

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment optimizer. Moment buffers are allocated on the first
/// step and must keep the same shapes afterwards.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  explicit AdamOptimizer(AdamConfig cfg) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  std::size_t steps() const { return step_; }

  void step(const std::vector<Matrix*>& params,
            const std::vector<const Matrix*>& grads, Direction dir) {
    require(params.size() == grads.size(), "optimizer: params/grads count mismatch");
    if (first_.empty()) {
      for (const Matrix* p : params) {
        first_.emplace_back(p->rows(), p->cols());
        second_.emplace_back(p->rows(), p->cols());
      }
    }
    require(first_.size() == params.size(), "optimizer: parameter count changed");
    for (std::size_t i = 0; i < params.size(); ++i) {
      require(params[i]->same_shape(*grads[i]) && params[i]->same_shape(first_[i]),
              "optimizer: shape mismatch for parameter " + std::to_string(i));
    }

    ++step_;
    const double sign = dir == Direction::kMaximize ? -1.0 : 1.0;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& w = params[i]->data();
      const auto& g = grads[i]->data();
      auto& m = first_[i].data();
      auto& v = second_[i].data();
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double gk = sign * g[k];
        m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * gk;
        v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * gk * gk;
        const double mhat = m[k] / c1;
        const double vhat = v[k] / c2;
        w[k] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
      }
    }
  }

 private:
  AdamConfig cfg_;
  std::size_t step_ = 0;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
};

}  // namespace gdpnet
