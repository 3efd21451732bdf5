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
#include <vector>

#include "sfc/kernels.h"
#include "sfc/rng.h"
#include "sfc/transforms.h"

using namespace sfc;

namespace {

Tensor RandomImage(std::vector<int> shape, Rng& rng, double lo = 0.0,
                   double hi = 1.0) {
  Tensor t(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<float>(rng.NextUniform(lo, hi));
  }
  return t;
}

// Independent dense-matrix oracle: H[i][j] = (-1)^popcount(i & j), explicit
// triple product, absolute sum over zero-padded blocks, per-element mean.
double SatdDenseOracle(const Tensor& a, const Tensor& b, int block) {
  const int h = a.dim(0), w = a.dim(1), c = a.dim(2);
  std::vector<std::vector<double>> H(block, std::vector<double>(block));
  for (int i = 0; i < block; ++i) {
    for (int j = 0; j < block; ++j) {
      H[i][j] = (__builtin_popcount(static_cast<unsigned>(i & j)) & 1) ? -1 : 1;
    }
  }
  double total = 0.0;
  for (int ci = 0; ci < c; ++ci) {
    for (int by = 0; by < h; by += block) {
      for (int bx = 0; bx < w; bx += block) {
        std::vector<std::vector<double>> d(block, std::vector<double>(block, 0));
        for (int y = 0; y < block; ++y) {
          for (int x = 0; x < block; ++x) {
            if (by + y < h && bx + x < w) {
              d[y][x] = static_cast<double>(a.At(by + y, bx + x, ci)) -
                        b.At(by + y, bx + x, ci);
            }
          }
        }
        for (int i = 0; i < block; ++i) {
          for (int j = 0; j < block; ++j) {
            double acc = 0.0;
            for (int p = 0; p < block; ++p) {
              for (int q = 0; q < block; ++q) {
                acc += H[i][p] * d[p][q] * H[j][q];
              }
            }
            total += std::fabs(acc);
          }
        }
      }
    }
  }
  return total / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("hadamard block transform matches the explicit 2x2 matrix") {
  Tensor block({2, 2});
  block.At(0, 0) = 1.0f;
  const Tensor out = HadamardBlockTransform(block);
  // H [[1,0],[0,0]] Hᵀ with H = [[1,1],[1,-1]] is all ones.
  for (size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(1.0));
}

TEST_CASE("hadamard zero block stays zero") {
  Tensor block({8, 8});
  const Tensor out = HadamardBlockTransform(block);
  for (size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0f);
}

TEST_CASE("hadamard 8x8 equals the dense triple product") {
  Rng rng(11);
  Tensor block = RandomImage({8, 8}, rng, -1.0, 1.0);
  const Tensor fast = HadamardBlockTransform(block);
  // Dense route.
  double H[8][8];
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      H[i][j] = (__builtin_popcount(static_cast<unsigned>(i & j)) & 1) ? -1 : 1;
    }
  }
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      double acc = 0.0;
      for (int p = 0; p < 8; ++p) {
        for (int q = 0; q < 8; ++q) acc += H[i][p] * block.At(p, q) * H[j][q];
      }
      CHECK(fast.At(i, j) == doctest::Approx(acc).epsilon(1e-5));
    }
  }
}

TEST_CASE("hadamard rejects non-power-of-two blocks") {
  CHECK_THROWS_AS(HadamardBlockTransform(Tensor({6, 6})), InvalidArgumentError);
  CHECK_THROWS_AS(HadamardBlockTransform(Tensor({3, 4})), InvalidArgumentError);
}

TEST_CASE("orthonormal hadamard is an involution") {
  Rng rng(12);
  for (int b : {2, 4, 8, 16}) {
    Tensor block = RandomImage({b, b}, rng, -2.0, 2.0);
    const Tensor twice = HadamardBlockTransform(
        HadamardBlockTransform(block, HadamardScaling::kOrthonormal),
        HadamardScaling::kOrthonormal);
    for (size_t i = 0; i < block.size(); ++i) {
      CHECK(twice[i] == doctest::Approx(block[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("satd of identical inputs is zero and satd is symmetric") {
  Rng rng(13);
  const Tensor a = RandomImage({16, 16, 3}, rng);
  const Tensor b = RandomImage({16, 16, 3}, rng);
  CHECK(Satd(a, a) == 0.0);
  CHECK(Satd(a, b) == doctest::Approx(Satd(b, a)).epsilon(1e-12));
  CHECK(Satd(a, b) >= 0.0);
}

TEST_CASE("satd matches the dense oracle on 8x8, 16x16 and padded 10x10") {
  Rng rng(14);
  for (auto shape : {std::vector<int>{8, 8, 1}, {16, 16, 3}, {10, 10, 3}}) {
    for (int rep = 0; rep < 20; ++rep) {
      const Tensor a = RandomImage(shape, rng);
      const Tensor b = RandomImage(shape, rng);
      const double got = Satd(a, b);
      const double want = SatdDenseOracle(a, b, kSatdBlockSize);
      CHECK(got == doctest::Approx(want).epsilon(1e-5));
    }
  }
}

TEST_CASE("satd single-block value is the absolute coefficient mean") {
  // 8x8 single channel: oracle is sum |H (a-b) Hᵀ| / 64.
  Rng rng(15);
  const Tensor a = RandomImage({8, 8, 1}, rng);
  const Tensor b = RandomImage({8, 8, 1}, rng);
  Tensor diff({8, 8});
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) diff.At(y, x) = a.At(y, x, 0) - b.At(y, x, 0);
  }
  const Tensor coeffs = HadamardBlockTransform(diff);
  double sum = 0.0;
  for (size_t i = 0; i < coeffs.size(); ++i) sum += std::fabs(coeffs[i]);
  CHECK(Satd(a, b) == doctest::Approx(sum / 64.0).epsilon(1e-6));
}

TEST_CASE("satd rejects shape mismatches") {
  CHECK_THROWS_AS(Satd(Tensor({8, 8, 1}), Tensor({8, 8, 3})),
                  InvalidArgumentError);
}

TEST_CASE("satd gradient matches central differences away from kinks") {
  Rng rng(16);
  const Tensor b = RandomImage({8, 8, 1}, rng);
  Tensor a = RandomImage({8, 8, 1}, rng, 2.0, 3.0);  // well away from b: no kinks
  Tensor grad;
  SatdWithGrad(a, b, &grad);
  const double eps = 1e-3;
  for (int i = 0; i < 8; ++i) {
    Tensor ap = a, am = a;
    const size_t idx = static_cast<size_t>(i) * 8 + 3;
    ap[idx] += static_cast<float>(eps);
    am[idx] -= static_cast<float>(eps);
    const double fd = (Satd(ap, b) - Satd(am, b)) / (2 * eps);
    CHECK(grad[idx] == doctest::Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("pyramid of a constant image has zero detail bands") {
  Tensor x = Tensor::Full({32, 32, 3}, 0.42f);
  const Pyramid p = PyramidBuild(x, 3);
  for (const auto& d : p.details) {
    for (size_t i = 0; i < d.size(); ++i) {
      CHECK(std::fabs(d[i]) < 1e-6f);
    }
  }
}

TEST_CASE("pyramid level shapes follow the dyadic ladder") {
  Tensor x({256, 256, 3});
  const Pyramid p = PyramidBuild(x, 3);
  REQUIRE(p.levels.size() == 3);
  CHECK(p.levels[0].dim(0) == 64);
  CHECK(p.levels[1].dim(0) == 128);
  CHECK(p.levels[2].dim(0) == 256);
}

TEST_CASE("pyramid build/collapse is an exact inverse pair") {
  Rng rng(17);
  for (auto [size, levels] : std::vector<std::pair<int, int>>{
           {64, 2}, {32, 3}, {48, 2}}) {
    const Tensor x = RandomImage({size, size, 3}, rng);
    const Pyramid p = PyramidBuild(x, levels);
    const Tensor back = PyramidCollapse(p);
    REQUIRE(back.SameShape(x));
    double max_err = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      max_err = std::max(max_err, std::fabs(static_cast<double>(x[i]) - back[i]));
    }
    CHECK(max_err < 1e-6);
  }
}

TEST_CASE("pyramid with zero details collapses to the bilinear chain") {
  Rng rng(18);
  const Tensor coarse = RandomImage({8, 8, 3}, rng);
  Pyramid p;
  p.levels.push_back(coarse);
  p.levels.push_back(Tensor({16, 16, 3}));  // finer levels are unused by collapse
  p.levels.push_back(Tensor({32, 32, 3}));
  p.details.push_back(Tensor({16, 16, 3}));
  p.details.push_back(Tensor({32, 32, 3}));
  const Tensor out = PyramidCollapse(p);
  // Reference: two explicit upsamplings.
  Tensor up1({16, 16, 3});
  kernels::UpsampleX2(coarse.data(), up1.data(), 1, 8, 8, 3);
  Tensor up2({32, 32, 3});
  kernels::UpsampleX2(up1.data(), up2.data(), 1, 16, 16, 3);
  for (size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i] == doctest::Approx(up2[i]).epsilon(1e-6));
  }
}

TEST_CASE("pyramid rejects indivisible sizes and mismatched details") {
  CHECK_THROWS_AS(PyramidBuild(Tensor({30, 30, 3}), 3), InvalidArgumentError);
  Pyramid p = PyramidBuild(Tensor({32, 32, 3}), 2);
  p.details.push_back(Tensor({64, 64, 3}));  // one detail band too many
  CHECK_THROWS_AS(PyramidCollapse(p), InvalidArgumentError);
}

TEST_CASE("minmax normalization maps endpoints to 0 and 1") {
  Tensor t({3});
  t[0] = -0.5f;
  t[1] = 0.5f;
  t[2] = 0.0f;
  auto [norm, side] = MinmaxNormalize(t);
  CHECK(side.r_min == -0.5f);
  CHECK(side.r_max == 0.5f);
  CHECK(norm[0] == doctest::Approx(0.0));
  CHECK(norm[1] == doctest::Approx(1.0));
  CHECK(norm[2] == doctest::Approx(0.5));
}

TEST_CASE("constant residual normalizes to zeros with (c, c) side info") {
  Tensor t = Tensor::Full({4, 4, 1}, 0.3f);
  auto [norm, side] = MinmaxNormalize(t);
  CHECK(side.r_min == 0.3f);
  CHECK(side.r_max == 0.3f);
  for (size_t i = 0; i < norm.size(); ++i) CHECK(norm[i] == 0.0f);
  // Inverse of the degenerate rule restores the constant.
  const Tensor back = MinmaxDenormalize(norm, side);
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i] == doctest::Approx(0.3f));
  }
}

TEST_CASE("denormalize with unit side info is the identity") {
  Rng rng(19);
  const Tensor t = RandomImage({5, 5, 3}, rng);
  const Tensor back = MinmaxDenormalize(t, {0.0f, 1.0f});
  for (size_t i = 0; i < t.size(); ++i) CHECK(back[i] == t[i]);
}

TEST_CASE("minmax normalize/denormalize round-trips within 1e-6") {
  Rng rng(20);
  for (int rep = 0; rep < 25; ++rep) {
    const Tensor t = RandomImage({6, 7, 3}, rng, -2.0, 2.0);
    auto [norm, side] = MinmaxNormalize(t);
    for (size_t i = 0; i < norm.size(); ++i) {
      CHECK(norm[i] >= 0.0f);
      CHECK(norm[i] <= 1.0f);
    }
    const Tensor back = MinmaxDenormalize(norm, side);
    for (size_t i = 0; i < t.size(); ++i) {
      CHECK(std::fabs(static_cast<double>(t[i]) - back[i]) < 1e-6);
    }
  }
}
