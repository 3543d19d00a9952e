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

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace gdpnet;
using gdpnet::testing::max_gradient_error;
using gdpnet::testing::random_vector;

namespace {

// Straight-line re-implementation used as an oracle for mlp_forward.
Vector reference_forward(const MlpParams& p, const Vector& x, Head head) {
  Vector a = x;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const Matrix& w = p.layers[l];
    Vector z(w.rows(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r)
      for (std::size_t c = 0; c < w.cols(); ++c) z[r] += w(r, c) * a[c];
    if (l + 1 < p.layers.size())
      for (double& v : z) v = std::max(v, 0.0);
    a = z;
  }
  if (head == Head::kSigmoid)
    for (double& v : a) v = 1.0 / (1.0 + std::exp(-v));
  if (head == Head::kSoftmax) {
    double z = 0.0;
    for (double v : a) z += std::exp(v);
    for (double& v : a) v = std::exp(v) / z;
  }
  return a;
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct RandomCase {
  MlpParams params;
  Vector input;
  Vector weights;  // loss = weights . output
  Head head;
};

RandomCase random_case(Rng& rng) {
  std::uniform_int_distribution<std::size_t> size(1, 6);
  std::uniform_int_distribution<int> pick_head(0, 2);
  const std::size_t depth = 2 + rng() % 2;
  std::vector<std::size_t> sizes{size(rng)};
  for (std::size_t l = 0; l < depth; ++l) sizes.push_back(size(rng));
  RandomCase c;
  c.params = MlpParams::glorot(sizes, rng);
  c.input = random_vector(sizes.front(), rng);
  c.weights = random_vector(sizes.back(), rng);
  c.head = static_cast<Head>(pick_head(rng));
  return c;
}

}  // namespace

TEST(MatrixTest, ShapeAndIndexing) {
  Matrix m(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 0), 4.0);
  EXPECT_EQ(m.row(1)[2], 6.0);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ValidationError);
}

TEST(MatrixTest, MatvecAndTranspose) {
  Matrix m(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  const Vector x{1, 0, -1};
  EXPECT_EQ(matvec(m, x), (Vector{-2, -2}));
  const Vector y{1, 1};
  EXPECT_EQ(matvec_transposed(m, y), (Vector{5, 7, 9}));
  EXPECT_THROW(matvec(m, y), ValidationError);
}

TEST(MatrixTest, SoftmaxSumsToOneAndIsPositive) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const Vector z = random_vector(1 + t % 7, rng, 20.0);
    const Vector p = softmax(z);
    double s = 0.0;
    for (double v : p) {
      EXPECT_GT(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  const Vector big = softmax(Vector{1000.0, 1000.0});
  EXPECT_DOUBLE_EQ(big[0], 0.5);
}

TEST(MatrixTest, SigmoidStaysInsideUnitInterval) {
  for (double z = -30.0; z <= 30.0; z += 0.25) {
    const double s = sigmoid(z);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_TRUE(std::isfinite(sigmoid(-1000.0)));
}

TEST(MatrixTest, GlorotBounds) {
  Rng rng(1);
  const Matrix w = glorot_uniform(30, 50, rng);
  const double bound = std::sqrt(6.0 / 80.0);
  for (double v : w.data()) EXPECT_LE(std::abs(v), bound);
}

TEST(MlpTest, ZeroWeightsSigmoidHeadGivesHalf) {
  MlpParams p{{Matrix(4, 3), Matrix(2, 4)}};
  const auto f = mlp_forward(p, Vector{1, -2, 3}, Head::kSigmoid);
  EXPECT_EQ(f.output, (Vector{0.5, 0.5}));
}

TEST(MlpTest, IdentityWeightsReproduceRelu) {
  Matrix eye(2, 2, std::vector<double>{1, 0, 0, 1});
  MlpParams p{{eye, eye}};
  EXPECT_EQ(mlp_forward(p, Vector{3.0, -2.0}, Head::kLinear).output, (Vector{3.0, 0.0}));
  EXPECT_EQ(mlp_forward(p, Vector{0.5, 7.0}, Head::kLinear).output, (Vector{0.5, 7.0}));
}

TEST(MlpTest, ForwardMatchesReferenceFormula) {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const auto c = random_case(rng);
    const Vector got = mlp_forward(c.params, c.input, c.head).output;
    const Vector want = reference_forward(c.params, c.input, c.head);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(MlpTest, ForwardRejectsBadInput) {
  Rng rng(2);
  const auto p = MlpParams::glorot({3, 4, 1}, rng);
  EXPECT_THROW(mlp_forward(p, Vector{1, 2}, Head::kLinear), ValidationError);
  EXPECT_THROW(mlp_forward(p, Vector{1, NAN, 2}, Head::kLinear), ValidationError);
  MlpParams broken{{Matrix(4, 3), Matrix(1, 5)}};
  EXPECT_THROW(mlp_forward(broken, Vector{1, 2, 3}, Head::kLinear), ValidationError);
}

TEST(MlpTest, ZeroUpstreamGivesZeroGradients) {
  Rng rng(5);
  const auto p = MlpParams::glorot({3, 4, 2}, rng);
  const auto f = mlp_forward(p, Vector{1, 2, 3}, Head::kSoftmax);
  const auto g = mlp_backward(p, f.cache, Vector{0.0, 0.0});
  for (const auto& m : g.weights.layers)
    for (double v : m.data()) EXPECT_EQ(v, 0.0);
}

TEST(MlpTest, DeadReluUnitHasZeroInnerRowGradient) {
  // Row 0 of the inner matrix yields a negative pre-activation for x = (1, 1).
  MlpParams p{{Matrix(2, 2, std::vector<double>{-1, -1, 1, 0.5}),
               Matrix(1, 2, std::vector<double>{2, 3})}};
  const Vector x{1, 1};
  const auto f = mlp_forward(p, x, Head::kLinear);
  ASSERT_LT(f.cache.pre_activations[0][0], 0.0);
  const auto g = mlp_backward(p, f.cache, Vector{1.0});
  EXPECT_EQ(g.weights.layers[0](0, 0), 0.0);
  EXPECT_EQ(g.weights.layers[0](0, 1), 0.0);
  EXPECT_NE(g.weights.layers[0](1, 0), 0.0);
}

TEST(MlpTest, BackwardMatchesFiniteDifferences) {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    auto c = random_case(rng);
    const auto f = mlp_forward(c.params, c.input, c.head);
    const auto g = mlp_backward(c.params, f.cache, c.weights);
    auto loss = [&] { return dot(c.weights, mlp_forward(c.params, c.input, c.head).output); };
    for (std::size_t l = 0; l < c.params.layers.size(); ++l) {
      EXPECT_LT(max_gradient_error(c.params.layers[l], g.weights.layers[l], loss), 1e-4)
          << "case " << t << " layer " << l;
    }
    Vector x = c.input;
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto loss_x = [&] { return dot(c.weights, mlp_forward(c.params, x, c.head).output); };
      const double numeric = gdpnet::testing::central_difference(x[i], loss_x);
      EXPECT_LT(gdpnet::testing::relative_error(g.input[i], numeric), 1e-4);
    }
  }
}

TEST(MlpTest, StaleCacheRejected) {
  Rng rng(8);
  const auto p = MlpParams::glorot({3, 4, 2}, rng);
  const auto other = MlpParams::glorot({3, 5, 2}, rng);
  const auto f = mlp_forward(p, Vector{1, 2, 3}, Head::kLinear);
  EXPECT_THROW(mlp_backward(other, f.cache, Vector{1.0, 1.0}), ValidationError);
  EXPECT_THROW(mlp_backward(p, f.cache, Vector{1.0}), ValidationError);
}

TEST(AdamTest, ZeroGradientLeavesParametersUnchanged) {
  Matrix w(2, 2, std::vector<double>{1, 2, 3, 4});
  const Matrix before = w;
  const Matrix g(2, 2);
  AdamOptimizer opt;
  for (int i = 0; i < 5; ++i) opt.step({&w}, {&g}, Direction::kMinimize);
  EXPECT_EQ(w, before);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  // With zero moments, m_hat = g and v_hat = g^2 after one step, so the update
  // is lr * g / (|g| + eps).
  const double lr = 0.01;
  for (double gv : {3.0, -0.2, 1e-3}) {
    Matrix w(1, 1, 0.0);
    const Matrix g(1, 1, gv);
    AdamOptimizer opt(AdamConfig{.learning_rate = lr});
    opt.step({&w}, {&g}, Direction::kMinimize);
    const double expected = -lr * gv / (std::abs(gv) + 1e-8);
    EXPECT_NEAR(w(0, 0), expected, 1e-15);
    EXPECT_NEAR(std::abs(w(0, 0)), lr, 1e-5 * lr);
  }
}

TEST(AdamTest, MaximizeMovesUphill) {
  Matrix w(1, 1, 0.0);
  const Matrix g(1, 1, 2.0);
  AdamOptimizer opt(AdamConfig{.learning_rate = 0.1});
  opt.step({&w}, {&g}, Direction::kMaximize);
  EXPECT_GT(w(0, 0), 0.0);
}

TEST(AdamTest, MinimizesQuadratic) {
  Matrix w(1, 1, 1.0);
  AdamOptimizer opt(AdamConfig{.learning_rate = 0.05});
  for (int i = 0; i < 200; ++i) {
    const Matrix g(1, 1, 2.0 * w(0, 0));
    opt.step({&w}, {&g}, Direction::kMinimize);
  }
  EXPECT_LT(std::abs(w(0, 0)), 0.05);
}

TEST(AdamTest, ShapeMismatchRejected) {
  Matrix w(2, 2);
  const Matrix g(2, 3);
  AdamOptimizer opt;
  EXPECT_THROW(opt.step({&w}, {&g}, Direction::kMinimize), ValidationError);
}

TEST(CheckpointTest, MatrixJsonRoundTripIsExact) {
  Rng rng(31);
  Matrix m = glorot_uniform(7, 5, rng);
  m(0, 0) = 1.0 / 3.0;
  m(1, 1) = -1e-300;
  const std::string text = matrix_to_json(m).dump();
  EXPECT_EQ(matrix_from_json(nlohmann::json::parse(text)), m);
}

TEST(CheckpointTest, ModelRoundTripIsExact) {
  Rng rng(4);
  GdpModel m;
  m.rep = RepresentationModel::init(6, 3, 2, rng, Activation::kTanh);
  m.policy = PolicyParams::glorot(6, {5, 4}, rng);
  const auto back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
  EXPECT_TRUE(back.rep == m.rep);
  EXPECT_TRUE(back.policy == m.policy);
}

TEST(CheckpointTest, MalformedCheckpointRejected) {
  auto j = nlohmann::json::parse(R"({"format":"something-else","version":1})");
  EXPECT_THROW(model_from_json(j), ValidationError);
  j = nlohmann::json::parse(R"({"rows":2,"cols":2,"data":[1,2,3]})");
  EXPECT_THROW(matrix_from_json(j), ValidationError);
}
