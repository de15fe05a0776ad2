// Copyright 2026 The acfm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "acfm/cnn.hpp"
#include "acfm/error.hpp"
#include "test_util.hpp"

namespace acfm {
namespace {

using testing::TempDir;

std::string file_contents(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
void zero_params(Network<T>& net) {
  for (ParamLayer<T>& l : net.params) {
    std::fill(l.weight.data.begin(), l.weight.data.end(), T{0});
    std::fill(l.bias.data.begin(), l.bias.data.end(), T{0});
  }
}

double sample_std(const std::vector<float>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double sq = 0.0;
  for (float x : v) sq += (x - mean) * (x - mean);
  return std::sqrt(sq / static_cast<double>(v.size()));
}

std::vector<float> random_image(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> x(n);
  for (float& v : x) v = u(gen);
  return x;
}

TEST(Architecture, CanonicalShapes) {
  const Architecture a = Architecture::canonical(1);
  const std::vector<Shape> s = a.output_shapes();
  ASSERT_EQ(s.size(), 13u);
  EXPECT_EQ(s[0], (Shape{64, 64, 8}));
  EXPECT_EQ(s[2], (Shape{32, 32, 8}));
  EXPECT_EQ(s[5], (Shape{16, 16, 16}));
  EXPECT_EQ(s[8], (Shape{8, 8, 32}));
  EXPECT_EQ(s[9].size(), 2048u);
  EXPECT_EQ(s[10].size(), 64u);
  EXPECT_EQ(s[12].size(), 3u);
  EXPECT_EQ(a.num_param_layers(), 5u);
  EXPECT_EQ(testing::error_code_of([] { Architecture::canonical(2); }), ErrorCode::kBadChannelCount);

  Architecture odd;
  odd.input = {3, 3, 1};
  odd.layers = {{LayerKind::kMaxPool2, 0, ""}};
  EXPECT_EQ(testing::error_code_of([&] { odd.output_shapes(); }), ErrorCode::kShapeMismatch);
  Architecture conv_after_flat;
  conv_after_flat.input = {4, 4, 1};
  conv_after_flat.layers = {{LayerKind::kFlatten, 0, ""}, {LayerKind::kConv3x3, 2, "c"}};
  EXPECT_EQ(testing::error_code_of([&] { conv_after_flat.output_shapes(); }), ErrorCode::kShapeMismatch);
}

TEST(Init, DeterministicHeNormalZeroBias) {
  const Model a = init_model(Architecture::canonical(3), 9);
  const Model b = init_model(Architecture::canonical(3), 9);
  ASSERT_EQ(a.params.size(), 5u);
  const char* names[] = {"conv1", "conv2", "conv3", "dense1", "dense2"};
  const std::size_t fan_in[] = {27, 72, 144, 2048, 64};
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(a.params[k].name, names[k]);
    EXPECT_EQ(a.params[k].weight.data, b.params[k].weight.data);
    for (float v : a.params[k].bias.data) EXPECT_EQ(v, 0.0f);
    const double target = std::sqrt(2.0 / static_cast<double>(fan_in[k]));
    const double s = sample_std(a.params[k].weight.data);
    EXPECT_GE(s, 0.8 * target) << names[k];
    EXPECT_LE(s, 1.2 * target) << names[k];
  }
  EXPECT_EQ(a.params[0].weight.dims, (std::vector<std::size_t>{3, 3, 3, 8}));
  EXPECT_EQ(a.params[3].weight.dims, (std::vector<std::size_t>{64, 2048}));
  EXPECT_NE(init_model(Architecture::canonical(3), 10).params[0].weight.data, a.params[0].weight.data);
}

TEST(Forward, ZeroModelGivesZeroLogitsAndUniformProbabilities) {
  Model m = init_model(Architecture::canonical(1), 1);
  zero_params(m);
  const std::vector<float> img(4096, 0.0f);
  const ForwardResult<float> r = forward(m, std::span<const float>(img));
  EXPECT_EQ(r.logits, (std::vector<float>{0.0f, 0.0f, 0.0f}));
  const ClassProbabilities p = predict(m, std::span<const float>(random_image(4096, 2)));
  for (double v : p.p) EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
}

TEST(Forward, HandConvolution) {
  Network<double> net;
  net.arch.input = {3, 3, 1};
  net.arch.layers = {{LayerKind::kConv3x3, 1, "c"}};
  net = init_network<double>(net.arch, 0);
  std::fill(net.params[0].weight.data.begin(), net.params[0].weight.data.end(), 1.0);
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  const ForwardResult<double> r = forward(net, std::span<const double>(x));
  ASSERT_EQ(r.logits.size(), 9u);
  EXPECT_EQ(r.logits[4], 45.0);
  EXPECT_EQ(r.logits[0], 1.0 + 2.0 + 4.0 + 5.0);
  EXPECT_EQ(r.logits[8], 5.0 + 6.0 + 8.0 + 9.0);
}

TEST(Forward, ConvMatchesDirectLoops) {
  Network<double> net;
  net.arch.input = {6, 5, 2};
  net.arch.layers = {{LayerKind::kConv3x3, 3, "c"}};
  net = init_network<double>(net.arch, 4);
  for (double& b : net.params[0].bias.data) b = 0.25;
  std::mt19937_64 gen(8);
  std::normal_distribution<double> d;
  std::vector<double> x(6 * 5 * 2);
  for (double& v : x) v = d(gen);
  const ForwardResult<double> r = forward(net, std::span<const double>(x));
  const std::vector<double>& w = net.params[0].weight.data;
  for (int y = 0; y < 6; ++y) {
    for (int xx = 0; xx < 5; ++xx) {
      for (int co = 0; co < 3; ++co) {
        double acc = 0.25;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            const int iy = y + ky - 1, ix = xx + kx - 1;
            if (iy < 0 || iy >= 6 || ix < 0 || ix >= 5) continue;
            for (int ci = 0; ci < 2; ++ci) {
              acc += w[((ky * 3 + kx) * 2 + ci) * 3 + co] * x[(iy * 5 + ix) * 2 + ci];
            }
          }
        }
        EXPECT_NEAR(r.logits[(y * 5 + xx) * 3 + co], acc, 1e-12);
      }
    }
  }
}

TEST(Forward, MaxPoolTiesPickFirst) {
  Network<double> net;
  net.arch.input = {2, 2, 1};
  net.arch.layers = {{LayerKind::kMaxPool2, 0, ""}};
  const std::vector<double> x = {3.0, 3.0, 3.0, 3.0};
  const ForwardResult<double> r = forward(net, std::span<const double>(x));
  EXPECT_EQ(r.logits, std::vector<double>{3.0});
  EXPECT_EQ(r.cache.argmax[0][0], 0u);
}

TEST(Forward, ShapeErrors) {
  const Model m = init_model(Architecture::canonical(1), 1);
  const std::vector<float> wrong(100, 0.0f);
  EXPECT_EQ(testing::error_code_of([&] { forward(m, std::span<const float>(wrong)); }), ErrorCode::kShapeMismatch);
  Model broken = m;
  broken.params[1].weight.data.pop_back();
  const std::vector<float> img(4096, 0.0f);
  EXPECT_EQ(testing::error_code_of([&] { forward(broken, std::span<const float>(img)); }),
            ErrorCode::kShapeMismatch);
}

TEST(Loss, UniformAndStabilized) {
  const std::vector<double> zero = {0.0, 0.0, 0.0};
  for (std::size_t label = 0; label < 3; ++label) {
    const LossGrad lg = loss_and_grad(std::span<const double>(zero), label);
    EXPECT_NEAR(lg.loss, std::log(3.0), 1e-12);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(lg.dlogits[k], 1.0 / 3.0 - (k == label ? 1.0 : 0.0), 1e-12);
    }
  }
  const std::vector<double> big = {1000.0, 0.0, 0.0};
  const LossGrad right = loss_and_grad(std::span<const double>(big), 0);
  EXPECT_NEAR(right.loss, 0.0, 1e-12);
  const LossGrad wrong = loss_and_grad(std::span<const double>(big), 1);
  EXPECT_NEAR(wrong.loss, 1000.0, 1e-9);
  for (double g : wrong.dlogits) EXPECT_TRUE(std::isfinite(g));
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  const Model m = init_model(Architecture::canonical(1), 3);
  const std::vector<float> img = random_image(4096, 3);
  const ForwardResult<float> r = forward(m, std::span<const float>(img));
  const std::vector<double> zero = {0.0, 0.0, 0.0};
  const Gradients<float> g = backward(m, r.cache, std::span<const double>(zero));
  for (const ParamLayer<float>& l : g) {
    for (float v : l.weight.data) ASSERT_EQ(v, 0.0f);
    for (float v : l.bias.data) ASSERT_EQ(v, 0.0f);
  }
}

TEST(GradCheck, BelowThresholdForThreeSeeds) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const double err = grad_check(seed);
    EXPECT_LT(err, 1e-4) << "seed " << seed;
    EXPECT_EQ(grad_check(seed), err);
  }
  const double degenerate = grad_check(1, GradCheckOptions{1e-3, true});
  EXPECT_TRUE(std::isfinite(degenerate));
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Model m = init_model(Architecture::canonical(1), 5);
  const Model before = m;
  AdamState<float> state = init_adam(m);
  const Gradients<float> g = zero_like(m);
  for (int i = 0; i < 3; ++i) adam_step(m, g, state);
  for (std::size_t k = 0; k < m.params.size(); ++k) {
    EXPECT_EQ(m.params[k].weight.data, before.params[k].weight.data);
    EXPECT_EQ(m.params[k].bias.data, before.params[k].bias.data);
  }
}

TEST(Adam, FirstStepIsLrTimesSign) {
  Network<double> net = init_network<double>(Architecture::gradcheck(), 2);
  const Network<double> before = net;
  Gradients<double> g = zero_like(net);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> d(0.0, 0.5);
  for (ParamLayer<double>& l : g) {
    for (double& v : l.weight.data) v = d(gen);
  }
  AdamState<double> state = init_adam(net);
  const AdamParams hyper{1e-3};
  adam_step(net, g, state, hyper);
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (std::size_t i = 0; i < g[k].weight.data.size(); ++i) {
      const double gi = g[k].weight.data[i];
      const double expected = -hyper.lr * gi / (std::abs(gi) + hyper.epsilon);
      ASSERT_NEAR(net.params[k].weight.data[i] - before.params[k].weight.data[i], expected, 1e-12);
    }
    EXPECT_EQ(net.params[k].bias.data, before.params[k].bias.data);
  }
}

TEST(Adam, Deterministic) {
  auto run = [] {
    Model m = init_model(Architecture::canonical(1), 5);
    AdamState<float> state = init_adam(m);
    const std::vector<float> img = random_image(4096, 6);
    for (int step = 0; step < 3; ++step) {
      const ForwardResult<float> r = forward(m, std::span<const float>(img));
      const LossGrad lg = loss_and_grad(std::span<const float>(r.logits), 2);
      adam_step(m, backward(m, r.cache, std::span<const double>(lg.dlogits)), state);
    }
    return m;
  };
  const Model a = run(), b = run();
  for (std::size_t k = 0; k < a.params.size(); ++k) EXPECT_EQ(a.params[k].weight.data, b.params[k].weight.data);
}

TEST(Predict, ProbabilitySimplex) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Model m = init_model(Architecture::canonical(3), seed);
    const ClassProbabilities p = predict(m, std::span<const float>(random_image(64 * 64 * 3, seed)));
    double sum = 0.0;
    for (double v : p.p) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(ModelFile, RoundTripAndErrors) {
  TempDir dir("model");
  const Model m = init_model(Architecture::canonical(3), 12);
  save_model(m, dir / "m.bin");
  const Model back = load_model(dir / "m.bin");
  EXPECT_TRUE(back.arch == m.arch);
  ASSERT_EQ(back.params.size(), m.params.size());
  for (std::size_t k = 0; k < m.params.size(); ++k) {
    EXPECT_EQ(back.params[k].weight.dims, m.params[k].weight.dims);
    EXPECT_EQ(back.params[k].weight.data, m.params[k].weight.data);
    EXPECT_EQ(back.params[k].bias.data, m.params[k].bias.data);
  }

  const std::string bytes = file_contents(dir / "m.bin");
  EXPECT_EQ(bytes.substr(0, 4), "ACFM");
  EXPECT_EQ(bytes.substr(4, 4), std::string("\x01\x00\x00\x00", 4));
  EXPECT_EQ(bytes.substr(8, 4), std::string("\x03\x00\x00\x00", 4));
  EXPECT_EQ(bytes.substr(12, 2), std::string("\x0C\x00", 2));
  EXPECT_EQ(bytes.substr(14, 12), "conv1.weight");

  write_file(dir / "magic.bin", "XXXX" + bytes.substr(4));
  EXPECT_EQ(testing::error_code_of([&] { load_model(dir / "magic.bin"); }), ErrorCode::kBadMagic);
  write_file(dir / "short.bin", bytes.substr(0, bytes.size() - 10));
  EXPECT_EQ(testing::error_code_of([&] { load_model(dir / "short.bin"); }), ErrorCode::kTruncated);
  std::string v2 = bytes;
  v2[4] = 2;
  write_file(dir / "v2.bin", v2);
  EXPECT_EQ(testing::error_code_of([&] { load_model(dir / "v2.bin"); }), ErrorCode::kVersionMismatch);
  EXPECT_EQ(testing::error_code_of([&] { load_model(dir / "absent.bin"); }), ErrorCode::kIo);
  EXPECT_EQ(testing::error_code_of([&] { save_model(init_model(Architecture::gradcheck(), 1), dir / "g.bin"); }),
            ErrorCode::kShapeMismatch);
}

}  // namespace
}  // namespace acfm
