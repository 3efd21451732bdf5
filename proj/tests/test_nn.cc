// Copyright (c) the SFC Project Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "sfc/checkpoint.h"
#include "sfc/kernels.h"
#include "sfc/nn.h"
#include "sfc/rng.h"

using namespace sfc;
using namespace sfc::nn;

namespace {

Tensor RandomTensor(std::vector<int> shape, Rng& rng, double lo = -1.0,
                    double hi = 1.0) {
  Tensor t(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<float>(rng.NextUniform(lo, hi));
  }
  return t;
}

// Weighted-sum loss over the layer output; checks input and parameter
// gradients against central differences.
void CheckLayerGradients(Layer& layer, const Tensor& x, Rng& rng,
                         double tol = 2e-2) {
  Tensor cache;
  const Tensor y0 = layer.Forward(x, &cache);
  Tensor w = RandomTensor(y0.shape(), rng);
  auto lossOf = [&](const Tensor& y) {
    double acc = 0.0;
    for (size_t i = 0; i < y.size(); ++i) acc += static_cast<double>(w[i]) * y[i];
    return acc;
  };

  std::vector<Parameter*> params;
  layer.CollectParams("p", &params);
  Adam::ZeroGrads(params);
  const Tensor gx = layer.Backward(w, cache);

  const double eps = 1e-3;
  // Input gradient.
  Rng pick(42);
  for (int rep = 0; rep < 8; ++rep) {
    const size_t i = pick.NextIndex(x.size());
    Tensor xp = x, xm = x;
    xp[i] += static_cast<float>(eps);
    xm[i] -= static_cast<float>(eps);
    const double fd = (lossOf(layer.Apply(xp)) - lossOf(layer.Apply(xm))) / (2 * eps);
    CHECK(static_cast<double>(gx[i]) ==
          doctest::Approx(fd).epsilon(tol).scale(1.0));
  }
  // Parameter gradients.
  for (Parameter* p : params) {
    for (int rep = 0; rep < 4; ++rep) {
      const size_t i = pick.NextIndex(p->value.size());
      const float keep = p->value[i];
      p->value[i] = keep + static_cast<float>(eps);
      const double up = lossOf(layer.Apply(x));
      p->value[i] = keep - static_cast<float>(eps);
      const double dn = lossOf(layer.Apply(x));
      p->value[i] = keep;
      const double fd = (up - dn) / (2 * eps);
      CHECK(static_cast<double>(p->grad[i]) ==
            doctest::Approx(fd).epsilon(tol).scale(1.0));
    }
  }
}

}  // namespace

TEST_CASE("linear layer gradients match finite differences") {
  Rng rng(300);
  Linear layer(6, 4, rng);
  CheckLayerGradients(layer, RandomTensor({3, 6}, rng), rng);
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(301);
  for (int stride : {1, 2}) {
    Conv2d layer(3, 2, 3, stride, rng);
    CheckLayerGradients(layer, RandomTensor({2, 8, 8, 2}, rng), rng);
  }
}

TEST_CASE("conv transpose gradients match finite differences") {
  Rng rng(302);
  ConvTranspose2d layer(3, 2, 3, 2, rng);
  CheckLayerGradients(layer, RandomTensor({2, 4, 4, 2}, rng), rng);
}

TEST_CASE("gdn and igdn gradients match finite differences") {
  Rng rng(303);
  for (bool inverse : {false, true}) {
    Gdn layer(5, inverse, 0.2f);
    // Perturb gamma off the diagonal so cross terms are exercised.
    std::vector<Parameter*> params;
    layer.CollectParams("g", &params);
    for (size_t i = 0; i < layer.gamma().value.size(); ++i) {
      layer.gamma().value[i] += static_cast<float>(rng.NextUniform(0.0, 0.05));
    }
    CheckLayerGradients(layer, RandomTensor({4, 5}, rng), rng);
  }
}

TEST_CASE("gdn on conv maps normalizes channel fibers") {
  Rng rng(304);
  Gdn layer(3, false, 0.1f);
  CheckLayerGradients(layer, RandomTensor({2, 3, 3, 3}, rng), rng);
}

TEST_CASE("bilinear upsample backward is the exact adjoint") {
  // <Up(x), w> == <x, Up^T(w)> for random x, w.
  Rng rng(305);
  const Tensor x = RandomTensor({1, 5, 7, 2}, rng);
  const Tensor w = RandomTensor({1, 10, 14, 2}, rng);
  Tensor up({1, 10, 14, 2});
  kernels::UpsampleX2(x.data(), up.data(), 1, 5, 7, 2);
  Tensor wt({1, 5, 7, 2});
  kernels::UpsampleX2Backward(w.data(), wt.data(), 1, 5, 7, 2);
  double lhs = 0.0, rhs = 0.0;
  for (size_t i = 0; i < up.size(); ++i) lhs += static_cast<double>(up[i]) * w[i];
  for (size_t i = 0; i < x.size(); ++i) rhs += static_cast<double>(x[i]) * wt[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
}

TEST_CASE("pool, reshape and clamp layers backpropagate") {
  Rng rng(306);
  GlobalAvgPool pool;
  CheckLayerGradients(pool, RandomTensor({2, 4, 4, 3}, rng), rng);
  ReshapeToMap reshape(2, 2, 3);
  CheckLayerGradients(reshape, RandomTensor({2, 12}, rng), rng);
  Clamp01 clamp;
  // Sample away from the clamp kinks.
  CheckLayerGradients(clamp, RandomTensor({2, 8}, rng, 0.1, 0.9), rng);
}

TEST_CASE("gdn evaluate matches direct formula recomputation") {
  Rng rng(307);
  const int c = 6;
  Tensor beta({c}), gamma({c, c});
  for (int i = 0; i < c; ++i) beta.At(i) = static_cast<float>(rng.NextUniform(0.5, 2.0));
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      gamma.At(i, j) = static_cast<float>(rng.NextUniform(0.0, 0.3));
    }
  }
  const Tensor x = RandomTensor({4, c}, rng, -2.0, 2.0);
  const Tensor y = GdnEvaluate(x, beta, gamma, false);
  const Tensor yi = GdnEvaluate(x, beta, gamma, true);
  for (int p = 0; p < 4; ++p) {
    for (int i = 0; i < c; ++i) {
      double s = beta.At(i);
      for (int j = 0; j < c; ++j) {
        s += static_cast<double>(gamma.At(i, j)) * x.At(p, j) * x.At(p, j);
      }
      CHECK(y.At(p, i) == doctest::Approx(x.At(p, i) / std::sqrt(s)).epsilon(1e-6));
      CHECK(yi.At(p, i) == doctest::Approx(x.At(p, i) * std::sqrt(s)).epsilon(1e-6));
    }
  }
}

TEST_CASE("gdn with zero gamma and unit beta is the identity") {
  const int c = 4;
  Tensor beta = Tensor::Full({c}, 1.0f);
  Tensor gamma({c, c});
  Rng rng(308);
  const Tensor x = RandomTensor({3, c}, rng);
  const Tensor y = GdnEvaluate(x, beta, gamma, false);
  for (size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]));
}

TEST_CASE("igdn inverts gdn within 1e-5 for shared small-gamma parameters") {
  // With diagonal gamma small enough, the multiplicative inverse form undoes
  // the division to first order; the quadratic remainder stays under 1e-5.
  Rng rng(309);
  const int c = 8;
  Tensor beta = Tensor::Full({c}, 1.0f);
  Tensor gamma({c, c});
  for (int i = 0; i < c; ++i) {
    gamma.At(i, i) = static_cast<float>(rng.NextUniform(0.0, 3e-4));
  }
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor x = RandomTensor({1, c}, rng, -2.0, 2.0);
    const Tensor y = GdnEvaluate(x, beta, gamma, false);
    const Tensor back = GdnEvaluate(y, beta, gamma, true);
    for (size_t i = 0; i < x.size(); ++i) {
      CHECK(std::fabs(static_cast<double>(back[i]) - x[i]) < 1e-5);
    }
  }
}

TEST_CASE("gdn rejects invalid parameters") {
  const int c = 3;
  Tensor beta({c}), gamma({c, c});
  Rng rng(310);
  const Tensor x = RandomTensor({1, c}, rng);
  CHECK_THROWS_AS(GdnEvaluate(x, beta, gamma, false), InvalidArgumentError);
  beta = Tensor::Full({c}, 1.0f);
  gamma.At(0, 0) = -0.5f;
  CHECK_THROWS_AS(GdnEvaluate(x, beta, gamma, false), InvalidArgumentError);
}

TEST_CASE("parallel kernels agree with the serial references") {
  Rng rng(311);
  SUBCASE("gemm") {
    const int m = 17, k = 23, n = 31;
    const Tensor a = RandomTensor({m, k}, rng);
    const Tensor b = RandomTensor({k, n}, rng);
    Tensor c1({m, n}), c2({m, n});
    kernels::Gemm(a.data(), b.data(), c1.data(), m, k, n);
    kernels::serial::Gemm(a.data(), b.data(), c2.data(), m, k, n);
    for (size_t i = 0; i < c1.size(); ++i) {
      CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-4));
    }
  }
  SUBCASE("conv via im2col vs direct") {
    const int h = 9, w = 11, cin = 3, cout = 4, kk = 3, stride = 2;
    const Tensor x = RandomTensor({h, w, cin}, rng);
    const Tensor wt = RandomTensor({kk * kk * cin, cout}, rng);
    const Tensor bias = RandomTensor({cout}, rng);
    const int oh = (h + 2 - kk) / stride + 1, ow = (w + 2 - kk) / stride + 1;
    Tensor cols({oh * ow, kk * kk * cin});
    kernels::Im2Col(x.data(), h, w, cin, kk, stride, 1, cols.data(), oh, ow);
    Tensor y1({oh * ow, cout});
    kernels::Gemm(cols.data(), wt.data(), y1.data(), oh * ow, kk * kk * cin, cout);
    kernels::AddBiasRows(y1.data(), bias.data(), oh * ow, cout);
    Tensor y2({oh, ow, cout});
    kernels::serial::Conv2d(x.data(), h, w, cin, wt.data(), bias.data(), kk,
                            stride, 1, y2.data(), oh, ow, cout);
    for (size_t i = 0; i < y1.size(); ++i) {
      CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-4));
    }
  }
  SUBCASE("satd plane") {
    const int s = 40;
    const Tensor a = RandomTensor({s, s}, rng);
    const Tensor b = RandomTensor({s, s}, rng);
    const double p = kernels::SatdPlaneSum(a.data(), b.data(), s, s, s, 8);
    const double q = kernels::serial::SatdPlaneSum(a.data(), b.data(), s, s, s, 8);
    CHECK(p == doctest::Approx(q).epsilon(1e-6));
  }
  SUBCASE("resampling") {
    const int h = 6, w = 10, c = 3;
    const Tensor x = RandomTensor({1, h, w, c}, rng);
    Tensor up1({1, 2 * h, 2 * w, c}), up2({1, 2 * h, 2 * w, c});
    kernels::UpsampleX2(x.data(), up1.data(), 1, h, w, c);
    kernels::serial::UpsampleX2(x.data(), up2.data(), 1, h, w, c);
    for (size_t i = 0; i < up1.size(); ++i) {
      CHECK(up1[i] == doctest::Approx(up2[i]).epsilon(1e-5));
    }
    Tensor dn1({1, h / 2, w / 2, c}), dn2({1, h / 2, w / 2, c});
    kernels::DownsampleX2(x.data(), dn1.data(), 1, h, w, c);
    kernels::serial::DownsampleX2(x.data(), dn2.data(), 1, h, w, c);
    for (size_t i = 0; i < dn1.size(); ++i) {
      CHECK(dn1[i] == doctest::Approx(dn2[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("adam drives a quadratic toward its minimum") {
  Parameter p;
  p.SetShape({2});
  p.value[0] = 4.0f;
  p.value[1] = -3.0f;
  Adam adam(0.05);
  for (int it = 0; it < 500; ++it) {
    p.grad[0] = 2.0f * (p.value[0] - 1.0f);
    p.grad[1] = 2.0f * (p.value[1] + 2.0f);
    adam.Step({&p});
  }
  CHECK(p.value[0] == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(p.value[1] == doctest::Approx(-2.0).epsilon(1e-2));
}

TEST_CASE("checkpoints round-trip named parameters") {
  Rng rng(312);
  Sequential net;
  net.Emplace<Linear>(4, 8, rng);
  net.Emplace<Gdn>(8, false);
  net.Emplace<Linear>(8, 2, rng);
  std::vector<Parameter*> params;
  net.CollectParams("net", &params);

  Checkpoint ck = Checkpoint::FromParams("stage", "{}", params);
  ck.blobs["extra"] = Bytes{1, 2, 3};
  const Bytes blob = ck.Serialize();
  const Checkpoint back = Checkpoint::Deserialize(blob);
  CHECK(back.stage == "stage");
  CHECK(back.blobs.at("extra") == Bytes{1, 2, 3});

  Sequential net2;
  Rng rng2(999);
  net2.Emplace<Linear>(4, 8, rng2);
  net2.Emplace<Gdn>(8, false);
  net2.Emplace<Linear>(8, 2, rng2);
  std::vector<Parameter*> params2;
  net2.CollectParams("net", &params2);
  back.ToParams(params2);

  const Tensor x = RandomTensor({3, 4}, rng);
  const Tensor y1 = net.Apply(x);
  const Tensor y2 = net2.Apply(x);
  for (size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
}

TEST_CASE("inference is bitwise deterministic across repeated calls") {
  Rng rng(313);
  Sequential net;
  net.Emplace<Conv2d>(3, 3, 8, 2, rng);
  net.Emplace<Relu>();
  net.Emplace<Conv2d>(3, 8, 4, 2, rng);
  const Tensor x = RandomTensor({2, 16, 16, 3}, rng);
  const Tensor y1 = net.Apply(x);
  const Tensor y2 = net.Apply(x);
  REQUIRE(y1.SameShape(y2));
  for (size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
}
