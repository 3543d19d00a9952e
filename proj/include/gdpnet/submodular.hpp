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

#include <bit>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

#include "gdpnet/selection_env.hpp"

namespace gdpnet {

using ItemSet = std::vector<NodeId>;  // always sorted ascending

/// Deterministic set function over a finite ground set with a cardinality cap.
struct SetFunction {
  std::string name;
  ItemSet ground;
  std::function<double(const ItemSet&)> evaluate;
  std::size_t cardinality_cap = 0;

  double operator()(const ItemSet& s) const { return evaluate(s); }
};

inline ItemSet with_item(ItemSet s, NodeId c) {
  s.insert(std::lower_bound(s.begin(), s.end(), c), c);
  return s;
}

struct Solution {
  ItemSet subset;
  double value = 0.0;
};

/// Repeatedly adds the item with the largest marginal gain (smallest id on
/// ties) until K items are chosen or no item has a positive gain.
inline Solution greedy_maximize(const SetFunction& f) {
  require(!f.ground.empty(), "greedy_maximize: empty ground set");
  require(f.cardinality_cap >= 1, "greedy_maximize: cardinality cap must be >= 1");
  Solution sol{{}, f({})};
  ItemSet remaining = f.ground;
  std::sort(remaining.begin(), remaining.end());
  while (sol.subset.size() < f.cardinality_cap && !remaining.empty()) {
    std::optional<std::size_t> best;
    double best_gain = 0.0;
    double best_value = 0.0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const double v = f(with_item(sol.subset, remaining[i]));
      const double gain = v - sol.value;
      if (gain > 0.0 && (!best || gain > best_gain)) {
        best = i;
        best_gain = gain;
        best_value = v;
      }
    }
    if (!best) break;
    sol.subset = with_item(sol.subset, remaining[*best]);
    sol.value = best_value;
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(*best));
  }
  return sol;
}

inline constexpr std::size_t kBruteForceLimit = 20;

/// Exhaustive maximum over all subsets of size <= K.
inline Solution brute_force_optimal(const SetFunction& f) {
  require(!f.ground.empty(), "brute_force_optimal: empty ground set");
  require(f.ground.size() <= kBruteForceLimit,
          "brute_force_optimal: ground set of " + std::to_string(f.ground.size()) +
              " items exceeds the limit of " + std::to_string(kBruteForceLimit));
  ItemSet items = f.ground;
  std::sort(items.begin(), items.end());
  Solution best{{}, f({})};
  const std::uint32_t total = 1u << items.size();
  for (std::uint32_t mask = 1; mask < total; ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > f.cardinality_cap) continue;
    ItemSet s;
    for (std::size_t i = 0; i < items.size(); ++i)
      if (mask >> i & 1u) s.push_back(items[i]);
    const double v = f(s);
    if (v > best.value) best = {std::move(s), v};
  }
  return best;
}

inline constexpr double kCheckTolerance = 1e-9;

struct Witness {
  ItemSet a;
  ItemSet b;
  std::optional<NodeId> item;
  double lhs = 0.0;  // f(B) - f(A), or gain of c on A
  double rhs = 0.0;  // 0, or gain of c on B
};

struct CheckReport {
  std::string function;
  std::size_t trials = 0;
  std::size_t passes = 0;
  std::optional<Witness> first_witness;

  bool passed() const { return passes == trials; }
};

inline nlohmann::json check_report_to_json(const CheckReport& r) {
  nlohmann::json j{{"function", r.function}, {"trials", r.trials}, {"passes", r.passes}};
  if (r.first_witness) {
    const auto& w = *r.first_witness;
    j["first_witness"] = {{"A", w.a}, {"B", w.b}, {"lhs", w.lhs}, {"rhs", w.rhs}};
    if (w.item) j["first_witness"]["c"] = *w.item;
  } else {
    j["first_witness"] = nullptr;
  }
  return j;
}

namespace detail {

// B: each ground item with probability 1/2; A: each item of B with probability 1/2.
inline std::pair<ItemSet, ItemSet> random_chain(const ItemSet& ground, Rng& rng) {
  ItemSet a, b;
  for (NodeId x : ground) {
    if (uniform01(rng) < 0.5) {
      b.push_back(x);
      if (uniform01(rng) < 0.5) a.push_back(x);
    }
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {a, b};
}

}  // namespace detail

/// Samples chains A <= B and checks f(B) - f(A) >= -1e-9.
inline CheckReport check_monotone(const SetFunction& f, std::size_t trials, Rng& rng) {
  require(trials >= 1, "check_monotone: trials must be >= 1");
  CheckReport r{f.name + ":monotone", trials, 0, std::nullopt};
  for (std::size_t t = 0; t < trials; ++t) {
    auto [a, b] = detail::random_chain(f.ground, rng);
    const double diff = f(b) - f(a);
    if (diff >= -kCheckTolerance) {
      ++r.passes;
    } else if (!r.first_witness) {
      r.first_witness = Witness{a, b, std::nullopt, diff, 0.0};
    }
  }
  return r;
}

/// Samples A <= B and c outside B; checks the diminishing-returns inequality
/// f(A+c) - f(A) >= f(B+c) - f(B) - 1e-9.
inline CheckReport check_submodular(const SetFunction& f, std::size_t trials, Rng& rng) {
  require(trials >= 1, "check_submodular: trials must be >= 1");
  require(!f.ground.empty(), "check_submodular: empty ground set");
  CheckReport r{f.name + ":submodular", trials, 0, std::nullopt};
  for (std::size_t t = 0; t < trials; ++t) {
    auto [a, b] = detail::random_chain(f.ground, rng);
    if (b.size() == f.ground.size()) {
      // Make room for c outside B.
      std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
      const NodeId drop = b[pick(rng)];
      b.erase(std::find(b.begin(), b.end(), drop));
      a.erase(std::remove(a.begin(), a.end(), drop), a.end());
    }
    ItemSet outside;
    for (NodeId x : f.ground)
      if (!std::binary_search(b.begin(), b.end(), x)) outside.push_back(x);
    std::uniform_int_distribution<std::size_t> pick(0, outside.size() - 1);
    const NodeId c = outside[pick(rng)];
    const double gain_a = f(with_item(a, c)) - f(a);
    const double gain_b = f(with_item(b, c)) - f(b);
    if (gain_a >= gain_b - kCheckTolerance) {
      ++r.passes;
    } else if (!r.first_witness) {
      r.first_witness = Witness{a, b, c, gain_a, gain_b};
    }
  }
  return r;
}

enum class CanonicalOrder { kAscendingValue, kAscendingId };

/// Total selection reward of a node viewed as a set function.
///
/// R(A) sums the per-step rewards f(u) / (sum of f over the items inserted so
/// far, u included) obtained by inserting A's items one at a time in a fixed
/// canonical order. With the default ascending-value order (ties by id) this
/// is monotone and submodular; ascending-id order is kept for comparison and
/// is not.
class GdpRewardFunction {
 public:
  GdpRewardFunction(NodeId target, ItemSet items, std::vector<double> values,
                    CanonicalOrder order = CanonicalOrder::kAscendingValue)
      : target_(target), order_(order) {
    require(items.size() == values.size(), "one value per item expected");
    for (std::size_t i = 0; i < items.size(); ++i) {
      require(values[i] >= 0.0 && std::isfinite(values[i]), "item values must be finite and >= 0");
      values_[items[i]] = values[i];
    }
  }

  static GdpRewardFunction from_env(const SelectionEnv& env, NodeId v,
                                    CanonicalOrder order = CanonicalOrder::kAscendingValue) {
    const auto nbrs = env.graph().neighbors(v);
    ItemSet items(nbrs.begin(), nbrs.end());
    std::vector<double> values;
    for (NodeId u : items) values.push_back(env.item_score(v, u));
    return GdpRewardFunction(v, std::move(items), std::move(values), order);
  }

  NodeId target() const { return target_; }
  double item_value(NodeId u) const { return values_.at(u); }

  ItemSet ground() const {
    ItemSet g;
    for (const auto& [u, _] : values_) g.push_back(u);
    return g;
  }

  /// Reward of a specific insertion sequence.
  double value_in_order(std::span<const NodeId> sequence) const {
    double sum = 0.0, total = 0.0;
    for (NodeId u : sequence) {
      const double f = values_.at(u);
      sum += f;
      total += sum < 1e-12 ? 0.0 : f / sum;
    }
    return total;
  }

  ItemSet canonical_sequence(const ItemSet& a) const {
    ItemSet seq = a;
    if (order_ == CanonicalOrder::kAscendingValue) {
      std::stable_sort(seq.begin(), seq.end(), [&](NodeId x, NodeId y) {
        const double fx = values_.at(x), fy = values_.at(y);
        return fx != fy ? fx < fy : x < y;
      });
    } else {
      std::sort(seq.begin(), seq.end());
    }
    return seq;
  }

  double operator()(const ItemSet& a) const { return value_in_order(canonical_sequence(a)); }

  /// Per-step reward for adding c when A is already selected: the
  /// denominator sums f over A u {c}.
  double marginal_reward(const ItemSet& a, NodeId c) const {
    double sum = values_.at(c);
    for (NodeId u : a) sum += values_.at(u);
    return sum < 1e-12 ? 0.0 : values_.at(c) / sum;
  }

  SetFunction as_set_function(std::size_t cap = 0) const {
    auto self = *this;
    const auto g = ground();
    return {"gdp_reward(v=" + std::to_string(target_) + ")", g,
            [self](const ItemSet& s) { return self(s); }, cap == 0 ? g.size() : cap};
  }

  /// Largest |R(sequence) - R(canonical)| over random permutations of random
  /// subsets: how far the reward is from being order independent.
  double order_discrepancy(std::size_t trials, Rng& rng) const {
    const auto g = ground();
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      ItemSet a;
      for (NodeId x : g)
        if (uniform01(rng) < 0.5) a.push_back(x);
      ItemSet perm = a;
      std::shuffle(perm.begin(), perm.end(), rng);
      worst = std::max(worst, std::abs(value_in_order(perm) - (*this)(a)));
    }
    return worst;
  }

 private:
  NodeId target_;
  CanonicalOrder order_;
  std::map<NodeId, double> values_;
};

/// Weighted coverage: item i covers a random subset of a weighted universe;
/// f(A) is the total weight of the union. Monotone submodular.
inline SetFunction random_coverage_function(std::size_t num_items, std::size_t universe,
                                            std::size_t cap, Rng& rng) {
  require(num_items >= 1 && universe >= 1, "coverage: empty instance");
  std::vector<double> weight(universe);
  for (double& w : weight) w = 0.1 + uniform01(rng);
  std::vector<std::vector<std::size_t>> covers(num_items);
  for (auto& c : covers) {
    for (std::size_t e = 0; e < universe; ++e)
      if (uniform01(rng) < 0.3) c.push_back(e);
  }
  ItemSet ground(num_items);
  std::iota(ground.begin(), ground.end(), NodeId{0});
  return {"coverage", ground,
          [weight, covers](const ItemSet& s) {
            std::vector<char> hit(weight.size(), 0);
            double total = 0.0;
            for (NodeId i : s)
              for (std::size_t e : covers[i])
                if (!hit[e]) {
                  hit[e] = 1;
                  total += weight[e];
                }
            return total;
          },
          cap};
}

/// Proposition checks over many reward instances: every trial picks snapshot
/// (t mod S) and a random non-isolated node, then draws one chain/triple.
struct GdpSuiteReport {
  CheckReport monotone{"gdp_reward:monotone"};
  CheckReport submodular{"gdp_reward:submodular"};
  double max_equivalence_error = 0.0;  // |marginal - per-step reward|, c last
  double max_order_discrepancy = 0.0;
};

inline GdpSuiteReport run_gdp_suite(std::span<const SelectionEnv* const> snapshots,
                                    std::size_t trials, Rng& rng,
                                    CanonicalOrder order = CanonicalOrder::kAscendingValue) {
  require(!snapshots.empty(), "gdp suite: no snapshots");
  std::vector<NodeId> nodes;
  const Graph& g = snapshots.front()->graph();
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (g.degree(v) > 0) nodes.push_back(v);
  require(!nodes.empty(), "gdp suite: graph has no edges");

  GdpSuiteReport r;
  r.monotone.trials = r.submodular.trials = trials;
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& env = *snapshots[t % snapshots.size()];
    const auto f = GdpRewardFunction::from_env(env, nodes[pick(rng)], order);
    const auto sf = f.as_set_function();
    auto mono = check_monotone(sf, 1, rng);
    r.monotone.passes += mono.passes;
    if (!r.monotone.first_witness && mono.first_witness) r.monotone.first_witness = mono.first_witness;
    auto sub = check_submodular(sf, 1, rng);
    r.submodular.passes += sub.passes;
    if (!r.submodular.first_witness && sub.first_witness) r.submodular.first_witness = sub.first_witness;

    // Equivalence with the environment reward when c comes last in the
    // canonical order, i.e. when the rollout would insert it after A.
    auto [a, b] = detail::random_chain(sf.ground, rng);
    const auto seq = f.canonical_sequence(b);
    if (!seq.empty()) {
      ItemSet prefix(seq.begin(), seq.end() - 1);
      std::sort(prefix.begin(), prefix.end());
      const NodeId c = seq.back();
      const double gain = f(b) - f(prefix);
      r.max_equivalence_error =
          std::max(r.max_equivalence_error, std::abs(gain - f.marginal_reward(prefix, c)));
    }
    r.max_order_discrepancy = std::max(r.max_order_discrepancy, f.order_discrepancy(1, rng));
  }
  return r;
}

inline constexpr double kGreedyRatio = 1.0 - 0.36787944117144233;  // 1 - 1/e

}  // namespace gdpnet
