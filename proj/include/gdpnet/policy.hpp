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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "gdpnet/mlp.hpp"
#include "gdpnet/optimizer.hpp"
#include "gdpnet/trajectory.hpp"

namespace gdpnet {

/// Selection policy pi(a=1|s) = sigmoid(net(s)). The pre-sigmoid output of the
/// same network is the regret score used to order candidates.
struct PolicyParams {
  MlpParams net;

  std::size_t state_size() const { return net.input_size(); }

  /// state (2 * embed_dim) -> hidden... -> 1
  static PolicyParams glorot(std::size_t embed_dim, const std::vector<std::size_t>& hidden,
                             Rng& rng) {
    std::vector<std::size_t> sizes{2 * embed_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    return {MlpParams::glorot(sizes, rng)};
  }

  void validate() const {
    net.validate();
    require(net.output_size() == 1, "policy network must have a scalar output");
  }
  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

inline constexpr double kProbClamp = 1e-6;

inline double clamp_prob(double p) {
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

inline double policy_logit(const PolicyParams& p, std::span<const double> s) {
  require(s.size() == p.state_size(), "policy: state length " + std::to_string(s.size()) +
                                          " != " + std::to_string(p.state_size()));
  return mlp_forward(p.net, s, Head::kLinear).output[0];
}

inline double policy_forward(const PolicyParams& p, std::span<const double> s) {
  return sigmoid(policy_logit(p, s));
}

struct ActionSample {
  int action = 0;
  double log_prob = 0.0;
};

inline double action_log_prob(double prob, int action) {
  const double p = clamp_prob(prob);
  return action == 1 ? std::log(p) : std::log1p(-p);
}

/// Bernoulli draw with log pi(a); `prob` is clamped to [1e-6, 1 - 1e-6].
inline ActionSample sample_action(double prob, Rng& rng) {
  require(std::isfinite(prob) && prob >= 0.0 && prob <= 1.0,
          "sample_action: probability out of range");
  const double p = clamp_prob(prob);
  const int a = uniform01(rng) < p ? 1 : 0;
  return {a, action_log_prob(p, a)};
}

/// KL(Bernoulli(p_old) || Bernoulli(p_new)).
inline double kl_bernoulli(double p_old, double p_new) {
  require(p_old > 0.0 && p_old < 1.0 && p_new > 0.0 && p_new < 1.0,
          "kl_bernoulli: arguments must lie strictly inside (0, 1)");
  return p_old * std::log(p_old / p_new) +
         (1.0 - p_old) * std::log((1.0 - p_old) / (1.0 - p_new));
}

/// Q_t = sum_{i>=t} gamma^(i-t) r_i, via Q_t = r_t + gamma * Q_{t+1}.
inline Vector discounted_returns(std::span<const double> rewards, double gamma) {
  require(gamma >= 0.0 && gamma <= 1.0, "discount must be in [0, 1]");
  Vector q(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    q[i] = acc;
  }
  return q;
}

struct PPOConfig {
  double gamma = 0.95;
  double kl_target = 0.01;        // delta
  double initial_penalty = 1.0;   // adaptive KL coefficient beta
  std::size_t update_epochs = 4;
  std::size_t minibatch_size = 256;
  double learning_rate = 1e-3;

  void validate() const {
    require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0, 1]");
    require(kl_target > 0.0, "KL threshold delta must be positive");
    require(initial_penalty >= 0.0, "KL penalty must be non-negative");
    require(minibatch_size >= 1, "minibatch size must be positive");
    require(learning_rate >= 0.0, "learning rate must be non-negative");
  }
};

/// One (state, action) pair prepared for the surrogate.
struct PpoSample {
  Vector state;
  int action = 0;
  double behavior_prob = 0.5;  // q(a|s) for the taken action
  double old_prob_one = 0.5;   // pi_old(1|s)
  double advantage = 0.0;
};

/// Discounted returns per trajectory, then mean/std normalization across
/// the whole batch.
inline std::vector<PpoSample> prepare_ppo_samples(const PolicyParams& old,
                                                  std::span<const Trajectory> batch,
                                                  double gamma,
                                                  double* mean_return = nullptr) {
  std::vector<PpoSample> samples;
  std::vector<double> returns;
  for (const auto& traj : batch) {
    std::vector<double> rewards;
    for (const auto& t : traj.transitions) rewards.push_back(t.reward);
    const auto q = discounted_returns(rewards, gamma);
    for (std::size_t i = 0; i < traj.transitions.size(); ++i) {
      const auto& t = traj.transitions[i];
      PpoSample s;
      s.state = t.state;
      s.action = t.action;
      s.behavior_prob = std::exp(t.log_prob);
      s.old_prob_one = clamp_prob(policy_forward(old, t.state));
      samples.push_back(std::move(s));
      returns.push_back(q[i]);
    }
  }
  if (samples.empty()) return samples;
  const double n = static_cast<double>(returns.size());
  const double mu = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  double var = 0.0;
  for (double r : returns) var += (r - mu) * (r - mu);
  const double sd = std::sqrt(var / n);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].advantage = sd > 1e-12 ? (returns[i] - mu) / sd : returns[i] - mu;
  }
  if (mean_return) *mean_return = mu;
  return samples;
}

struct SurrogateValue {
  double objective = 0.0;  // mean ratio * A - beta * mean KL
  double mean_kl = 0.0;
};

inline SurrogateValue surrogate_objective(const PolicyParams& p,
                                          std::span<const PpoSample> samples,
                                          double penalty) {
  require(!samples.empty(), "surrogate: empty batch");
  SurrogateValue v;
  for (const auto& s : samples) {
    const double p1 = policy_forward(p, s.state);
    const double pa = s.action == 1 ? p1 : 1.0 - p1;
    const double kl = kl_bernoulli(s.old_prob_one, clamp_prob(p1));
    v.objective += pa / s.behavior_prob * s.advantage - penalty * kl;
    v.mean_kl += kl;
  }
  const double n = static_cast<double>(samples.size());
  v.objective /= n;
  v.mean_kl /= n;
  return v;
}

/// Gradient of surrogate_objective with respect to the policy weights.
inline MlpParams surrogate_gradient(const PolicyParams& p, std::span<const PpoSample> samples,
                                    double penalty) {
  require(!samples.empty(), "surrogate: empty batch");
  MlpParams grad = MlpParams::zeros_like(p.net);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    auto fwd = mlp_forward(p.net, s.state, Head::kLinear);
    const double p1 = sigmoid(fwd.output[0]);
    const double dp = p1 * (1.0 - p1);
    const double dratio = (s.action == 1 ? dp : -dp) / s.behavior_prob;
    // d KL(old || sigmoid(z)) / dz = sigmoid(z) - p_old
    const double dz = inv_n * (s.advantage * dratio - penalty * (p1 - s.old_prob_one));
    const Vector up{dz};
    auto g = mlp_backward(p.net, fwd.cache, up);
    for (std::size_t l = 0; l < grad.layers.size(); ++l) axpy(grad.layers[l], g.weights.layers[l], 1.0);
  }
  return grad;
}

struct PPODiagnostics {
  double mean_kl = 0.0;
  double objective = 0.0;
  double mean_return = 0.0;
  double penalty = 0.0;
  std::size_t epochs_accepted = 0;
  std::size_t retries = 0;
  bool stopped_on_kl = false;
};

/// KL-penalized PPO learner; owns the optimizer and the adaptive penalty.
///
/// After every update epoch the mean KL(pi_old || pi) over the batch states is
/// measured. Above 1.5 * delta the penalty doubles and the epoch is redone
/// from its starting point once; if it still overshoots, the epoch is
/// discarded and updating stops. Below delta / 1.5 the penalty halves.
class PpoLearner {
 public:
  explicit PpoLearner(PPOConfig cfg)
      : cfg_(cfg), penalty_(cfg.initial_penalty),
        opt_(AdamConfig{.learning_rate = cfg.learning_rate}) {
    cfg_.validate();
  }

  double penalty() const { return penalty_; }
  const PPOConfig& config() const { return cfg_; }

  PPODiagnostics update(PolicyParams& p, const PolicyParams& old,
                        std::span<const Trajectory> batch, Rng& rng) {
    require(!batch.empty(), "ppo_update: empty batch");
    p.validate();
    require(p.net.layers.size() == old.net.layers.size(), "ppo_update: snapshot shape mismatch");
    PPODiagnostics d;
    const auto samples = prepare_ppo_samples(old, batch, cfg_.gamma, &d.mean_return);
    if (samples.empty()) {
      d.penalty = penalty_;
      return d;
    }

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < cfg_.update_epochs; ++epoch) {
      const PolicyParams start_params = p;
      const AdamOptimizer start_opt = opt_;
      bool accepted = false;
      for (int attempt = 0; attempt < 2; ++attempt) {
        if (attempt > 0) {
          p = start_params;
          opt_ = start_opt;
          ++d.retries;
        }
        run_epoch(p, samples, order, rng);
        const double kl = surrogate_objective(p, samples, 0.0).mean_kl;
        if (kl <= 1.5 * cfg_.kl_target) {
          if (kl < cfg_.kl_target / 1.5) penalty_ *= 0.5;
          accepted = true;
          break;
        }
        penalty_ = std::max(penalty_ * 2.0, 1e-8);
      }
      if (!accepted) {
        p = start_params;
        opt_ = start_opt;
        d.stopped_on_kl = true;
        break;
      }
      ++d.epochs_accepted;
    }

    const auto final_value = surrogate_objective(p, samples, penalty_);
    if (!std::isfinite(final_value.objective)) throw RuntimeFailure("PPO objective is not finite");
    d.objective = final_value.objective;
    d.mean_kl = final_value.mean_kl;
    d.penalty = penalty_;
    return d;
  }

 private:
  void run_epoch(PolicyParams& p, const std::vector<PpoSample>& samples,
                 std::vector<std::size_t>& order, Rng& rng) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg_.minibatch_size) {
      const std::size_t end = std::min(order.size(), start + cfg_.minibatch_size);
      std::vector<PpoSample> mb;
      mb.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) mb.push_back(samples[order[i]]);
      auto grad = surrogate_gradient(p, mb, penalty_);
      std::vector<Matrix*> params;
      std::vector<const Matrix*> grads;
      for (std::size_t l = 0; l < p.net.layers.size(); ++l) {
        params.push_back(&p.net.layers[l]);
        grads.push_back(&grad.layers[l]);
      }
      opt_.step(params, grads, Direction::kMaximize);
    }
  }

  PPOConfig cfg_;
  double penalty_;
  AdamOptimizer opt_;
};

struct PpoUpdateResult {
  PolicyParams params;
  PPODiagnostics diagnostics;
};

/// Stateless convenience wrapper: a fresh learner for a single update.
inline PpoUpdateResult ppo_update(const PolicyParams& current, const PolicyParams& old,
                                  std::span<const Trajectory> batch, const PPOConfig& cfg,
                                  std::uint64_t seed = 0) {
  PpoLearner learner(cfg);
  Rng rng(seed);
  PpoUpdateResult r{current, {}};
  r.diagnostics = learner.update(r.params, old, batch, rng);
  return r;
}

}  // namespace gdpnet
