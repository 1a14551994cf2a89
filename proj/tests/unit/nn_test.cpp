// Copyright 2026 The mammodp Authors
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

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mammodp/nn/layers.hpp"
#include "mammodp/nn/ops.hpp"
#include "mammodp/nn/optim.hpp"
#include "mammodp/nn/tensor.hpp"

namespace mammodp::nn {
namespace {

using Fn = std::function<Tensor(const std::vector<Tensor>&)>;

Tensor Random(Shape shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(static_cast<std::size_t>(Numel(shape)));
  for (auto& x : v) x = n(rng);
  return Tensor::FromData(std::move(shape), std::move(v), true);
}

// Reduces an arbitrary output to a scalar with fixed random weights so that
// every output element contributes to the checked gradient.
Tensor Project(const Tensor& out, std::uint64_t seed) {
  Tensor w = Random(out.shape(), seed);
  w.set_requires_grad(false);
  return Sum(Mul(out, w));
}

// Central differences against the analytic gradient on every input element.
void ExpectGradientsMatch(std::vector<Tensor> inputs, const Fn& f, double tol = 1e-6) {
  Tensor loss = f(inputs);
  loss.Backward();
  std::vector<std::vector<double>> analytic;
  for (auto& t : inputs) {
    analytic.emplace_back(t.has_grad() ? std::vector<double>(t.grad().begin(), t.grad().end())
                                       : std::vector<double>(t.numel(), 0.0));
  }
  NoGradGuard guard;
  const double h = 1e-5;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto values = inputs[i].values();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double keep = values[j];
      values[j] = keep + h;
      const double up = f(inputs).item();
      values[j] = keep - h;
      const double down = f(inputs).item();
      values[j] = keep;
      const double numeric = (up - down) / (2 * h);
      EXPECT_NEAR(analytic[i][j], numeric, tol * std::max(1.0, std::fabs(numeric)))
          << "input " << i << " element " << j;
    }
  }
}

TEST(Gradients, ElementwiseOps) {
  const Fn f = [](const std::vector<Tensor>& in) {
    Tensor a = Tanh(in[0]);
    Tensor b = Sigmoid(in[1]);
    Tensor c = Gelu(Add(a, b));
    Tensor d = LeakyRelu(Sub(Mul(c, in[0]), Scale(in[1], 0.3)), 0.2);
    return Project(d, 11);
  };
  ExpectGradientsMatch({Random({3, 4}, 1), Random({3, 4}, 2)}, f);
}

TEST(Gradients, LinearAndMatMul) {
  const Fn f = [](const std::vector<Tensor>& in) {
    Tensor y = Linear(in[0], in[1], in[2]);
    return Project(Add(MatMul(in[0], in[1]), y), 12);
  };
  ExpectGradientsMatch({Random({4, 3}, 3), Random({3, 5}, 4), Random({5}, 5)}, f);
}

TEST(Gradients, ShapeOps) {
  const Fn f = [](const std::vector<Tensor>& in) {
    Tensor g = GatherRows(in[0], {2, 0, 2, 1});
    Tensor c = ConcatCols(g, in[1]);
    Tensor m = GroupMeanRows(c, 2);
    return Project(Reshape(m, {1, 2 * 5}), 13);
  };
  ExpectGradientsMatch({Random({3, 2}, 6), Random({4, 3}, 7)}, f);
}

TEST(Gradients, Conv2d) {
  const Fn f = [](const std::vector<Tensor>& in) { return Project(Conv2d(in[0], in[1], in[2], 2, 1), 14); };
  ExpectGradientsMatch({Random({2, 2, 6, 6}, 8), Random({3, 2, 3, 3}, 9), Random({3}, 10)}, f);
}

TEST(Gradients, ConvTranspose2d) {
  const Fn f = [](const std::vector<Tensor>& in) {
    Tensor y = ConvTranspose2d(in[0], in[1], in[2], 2, 1);
    EXPECT_EQ(y.dim(2), (3 - 1) * 2 - 2 + 4);
    return Project(y, 15);
  };
  ExpectGradientsMatch({Random({2, 2, 3, 3}, 16), Random({2, 3, 4, 4}, 17), Random({3}, 18)}, f);
}

TEST(Gradients, ConcatChannels) {
  const Fn f = [](const std::vector<Tensor>& in) { return Project(ConcatChannels(in[0], in[1]), 19); };
  ExpectGradientsMatch({Random({2, 1, 3, 3}, 20), Random({2, 2, 3, 3}, 21)}, f);
}

TEST(Gradients, BatchNormTraining) {
  const Fn f = [](const std::vector<Tensor>& in) {
    BatchNormStats stats{{0, 0}, {1, 1}};
    return Project(BatchNorm2d(in[0], in[1], in[2], stats, true), 22);
  };
  ExpectGradientsMatch({Random({3, 2, 2, 2}, 23), Random({2}, 24), Random({2}, 25)}, f, 1e-5);
}

TEST(Gradients, LayerNorm) {
  const Fn f = [](const std::vector<Tensor>& in) { return Project(LayerNorm(in[0], in[1], in[2]), 26); };
  ExpectGradientsMatch({Random({3, 5}, 27), Random({5}, 28), Random({5}, 29)}, f, 1e-5);
}

TEST(Gradients, WindowAttention) {
  // Two 2x2 windows (4 tokens), 2 heads of 2 channels, shifted-style mask.
  const int tokens = 4, heads = 2, channels = 4, windows = 2;
  std::vector<std::int32_t> index(tokens * tokens);
  for (int i = 0; i < tokens * tokens; ++i) index[i] = i % 9;
  std::vector<double> mask(windows * tokens * tokens, 0.0);
  mask[tokens * tokens + 1] = -100.0;
  const Fn f = [&](const std::vector<Tensor>& in) {
    return Project(WindowAttention(in[0], heads, tokens, in[1], index, mask, windows), 30);
  };
  ExpectGradientsMatch({Random({windows * tokens, 3 * channels}, 31), Random({9, heads}, 32)}, f);
}

TEST(Gradients, SmoothedCrossEntropy) {
  const std::vector<int> labels = {0, 1, 1};
  const Fn f = [&](const std::vector<Tensor>& in) { return SmoothedCrossEntropy(in[0], labels, 0.1); };
  ExpectGradientsMatch({Random({3, 2}, 33)}, f);
}

TEST(SmoothedCrossEntropy, UniformLogitsGiveLn2ForEitherLabel) {
  const Tensor logits = Tensor::FromData({1, 2}, {0.0, 0.0});
  for (int label : {0, 1}) {
    const std::vector<int> l = {label};
    EXPECT_DOUBLE_EQ(SmoothedCrossEntropy(logits, l, 0.1).item(), std::log(2.0));
  }
}

TEST(SmoothedCrossEntropy, MatchesClosedForm) {
  const Tensor logits = Tensor::FromData({1, 2}, {0.3, -1.2});
  const std::vector<int> l = {1};
  const double z = std::log(std::exp(0.3) + std::exp(-1.2));
  const double expected = -(0.05 * (0.3 - z) + 0.95 * (-1.2 - z));
  EXPECT_NEAR(SmoothedCrossEntropy(logits, l, 0.1).item(), expected, 1e-14);
}

TEST(NoGrad, BuildsNoGraph) {
  Tensor a = Random({2, 2}, 40);
  NoGradGuard guard;
  EXPECT_FALSE(GradEnabled());
  Tensor b = Tanh(a);
  EXPECT_FALSE(b.requires_grad());
}

TEST(Adam, FirstStepMatchesClosedForm) {
  Tensor p = Tensor::FromData({3}, {1.0, -2.0, 0.5}, true);
  Adam opt({p}, {.lr = 0.1, .weight_decay = 0.01, .decoupled_weight_decay = true});
  const std::vector<double> g = {0.2, -0.4, 0.0};
  std::copy(g.begin(), g.end(), p.grad().begin());
  opt.Step();
  const std::vector<double> start = {1.0, -2.0, 0.5};
  for (int i = 0; i < 3; ++i) {
    const double decayed = start[i] - 0.1 * 0.01 * start[i];
    const double step = g[i] == 0.0 ? 0.0 : 0.1 * g[i] / (std::fabs(g[i]) + 1e-8);
    EXPECT_NEAR(p.values()[i], decayed - step, 1e-12);
  }
}

TEST(Adam, ParametersWithoutGradientStayPut) {
  Tensor p = Tensor::FromData({2}, {1.0, 2.0}, true);
  Tensor q = Tensor::FromData({1}, {3.0}, true);
  Adam opt({p, q}, {.lr = 0.1});
  p.grad()[0] = 1.0;
  opt.Step();
  EXPECT_EQ(q.values()[0], 3.0);
  EXPECT_NE(p.values()[0], 1.0);
}

TEST(State, FlattenUnflattenRoundTrip) {
  std::vector<Tensor> ts = {Random({2, 3}, 50), Random({4}, 51)};
  const auto flat = Flatten(ts);
  ASSERT_EQ(flat.size(), 10u);
  std::vector<Tensor> other = {Tensor::Zeros({2, 3}), Tensor::Zeros({4})};
  Unflatten(flat, other);
  EXPECT_EQ(Flatten(other), flat);
}

}  // namespace
}  // namespace mammodp::nn
