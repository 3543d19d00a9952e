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

#include <string>
#include <vector>

#include "gdpnet/matrix.hpp"

namespace gdpnet {

enum class Head { kSigmoid, kSoftmax, kLinear };

/// Bias-free perceptron: out = head(W_L ... ReLU(W_2 ReLU(W_1 x))).
///
/// `layers` are ordered input side first, so a two-matrix net stores the
/// inner (hidden x input) matrix at index 0 and the outer (output x hidden)
/// matrix at index 1.
struct MlpParams {
  std::vector<Matrix> layers;

  std::size_t input_size() const { return layers.front().cols(); }
  std::size_t output_size() const { return layers.back().rows(); }

  void validate() const {
    require(!layers.empty(), "mlp has no layers");
    for (std::size_t i = 1; i < layers.size(); ++i) {
      require(layers[i].cols() == layers[i - 1].rows(),
              "mlp layer " + std::to_string(i) + " has " +
                  std::to_string(layers[i].cols()) + " columns, expected " +
                  std::to_string(layers[i - 1].rows()));
    }
  }

  /// sizes = {input, hidden..., output}
  static MlpParams glorot(const std::vector<std::size_t>& sizes, Rng& rng) {
    require(sizes.size() >= 2, "mlp needs at least input and output sizes");
    MlpParams p;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      p.layers.push_back(glorot_uniform(sizes[i + 1], sizes[i], rng));
    }
    return p;
  }

  static MlpParams zeros_like(const MlpParams& o) {
    MlpParams p;
    for (const auto& m : o.layers) p.layers.emplace_back(m.rows(), m.cols());
    return p;
  }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct MlpCache {
  Head head = Head::kLinear;
  std::vector<Vector> inputs;           // input to each layer
  std::vector<Vector> pre_activations;  // W_l * inputs[l]
  Vector output;
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
};

struct MlpForward {
  Vector output;
  MlpCache cache;
};

inline Vector apply_head(Head head, const Vector& z) {
  switch (head) {
    case Head::kLinear:
      return z;
    case Head::kSigmoid: {
      Vector y(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) y[i] = sigmoid(z[i]);
      return y;
    }
    case Head::kSoftmax:
      return softmax(z);
  }
  return z;
}

inline MlpForward mlp_forward(const MlpParams& p, std::span<const double> x,
                              Head head) {
  p.validate();
  require(x.size() == p.input_size(),
          "mlp_forward: input length " + std::to_string(x.size()) +
              " != " + std::to_string(p.input_size()));
  require(all_finite(x), "mlp_forward: non-finite input");

  MlpForward f;
  f.cache.head = head;
  Vector a(x.begin(), x.end());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    f.cache.shapes.emplace_back(p.layers[l].rows(), p.layers[l].cols());
    Vector z = matvec(p.layers[l], a);
    f.cache.inputs.push_back(std::move(a));
    if (l + 1 < p.layers.size()) {
      a = z;
      for (double& v : a) v = v > 0.0 ? v : 0.0;
    }
    f.cache.pre_activations.push_back(std::move(z));
  }
  f.output = apply_head(head, f.cache.pre_activations.back());
  f.cache.output = f.output;
  return f;
}

struct MlpGradients {
  MlpParams weights;
  Vector input;  // d loss / d x
};

/// Reverse pass. `upstream` is d loss / d output (post-head).
inline MlpGradients mlp_backward(const MlpParams& p, const MlpCache& cache,
                                 std::span<const double> upstream) {
  require(cache.shapes.size() == p.layers.size(),
          "mlp_backward: cache does not match parameters");
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    require(cache.shapes[l] ==
                std::make_pair(p.layers[l].rows(), p.layers[l].cols()),
            "mlp_backward: stale cache for layer " + std::to_string(l));
  }
  require(upstream.size() == cache.output.size(),
          "mlp_backward: upstream gradient has wrong length");

  const Vector& y = cache.output;
  Vector dz(upstream.begin(), upstream.end());
  switch (cache.head) {
    case Head::kLinear:
      break;
    case Head::kSigmoid:
      for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= y[i] * (1.0 - y[i]);
      break;
    case Head::kSoftmax: {
      double dot = 0.0;
      for (std::size_t i = 0; i < dz.size(); ++i) dot += y[i] * upstream[i];
      for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = y[i] * (upstream[i] - dot);
      break;
    }
  }

  MlpGradients g{MlpParams::zeros_like(p), {}};
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    add_outer(g.weights.layers[l], dz, cache.inputs[l]);
    Vector da = matvec_transposed(p.layers[l], dz);
    if (l == 0) {
      g.input = std::move(da);
      break;
    }
    const Vector& z_prev = cache.pre_activations[l - 1];
    for (std::size_t i = 0; i < da.size(); ++i) {
      if (z_prev[i] <= 0.0) da[i] = 0.0;
    }
    dz = std::move(da);
  }
  return g;
}

}  // namespace gdpnet
