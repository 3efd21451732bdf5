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

#include "sfc/kernels.h"
#include "sfc/texture_generator.h"

using namespace sfc;

namespace {

ExtractorConfig ToyExtractorConfig() {
  ExtractorConfig e;
  e.backbone = {{3, 8, 2}, {3, 16, 2}};
  e.embed_dim = 8;
  e.num_classes = 3;
  e.input_size = 32;
  e.transform_size = 8;
  e.head_seed_channels = 8;
  e.head = {{3, 8, 2}, {3, 3, 2}};
  return e;
}

GeneratorConfig ToyGeneratorConfig() {
  GeneratorConfig g;
  g.num_levels = 2;
  g.output_size = 32;
  g.level_filters = {8, 8};
  return g;
}

}  // namespace

TEST_CASE("rec_base level sizes double from the transform output") {
  Rng rng(800);
  TextureGenerator gen(ToyGeneratorConfig(), ToyExtractorConfig(), rng);
  Tensor f({1, 8});
  for (size_t i = 0; i < f.size(); ++i) {
    f[i] = static_cast<float>(rng.NextUniform(-1.0, 1.0));
  }
  const auto levels = gen.RecBase(f);
  REQUIRE(levels.size() == 2);
  CHECK(levels[0].dim(1) == 16);
  CHECK(levels[0].dim(3) == 3);
  CHECK(levels[1].dim(1) == 32);
}

TEST_CASE("paper-geometry level sizes are 64, 128, 256") {
  Rng rng(801);
  ExtractorConfig e = ToyExtractorConfig();
  e.embed_dim = 8;
  e.transform_size = 32;
  e.head = {{3, 8, 2}, {3, 3, 2}};
  e.head_seed_channels = 4;
  GeneratorConfig g;
  g.num_levels = 3;
  g.output_size = 256;
  g.level_filters = {4, 4, 4};
  TextureGenerator gen(g, e, rng);
  Tensor f({1, 8});
  const auto levels = gen.RecBase(f);
  REQUIRE(levels.size() == 3);
  CHECK(levels[0].dim(1) == 64);
  CHECK(levels[1].dim(1) == 128);
  CHECK(levels[2].dim(1) == 256);
}

TEST_CASE("zero detail branches reduce to the bilinear chain of x_trans") {
  Rng rng(802);
  TextureGenerator gen(ToyGeneratorConfig(), ToyExtractorConfig(), rng);
  for (int l = 0; l < 2; ++l) {
    std::vector<nn::Parameter*> params;
    gen.detail_branch(l).CollectParams("d", &params);
    for (auto* p : params) {
      std::fill(p->value.data(), p->value.data() + p->value.size(), 0.0f);
    }
  }
  Tensor f({1, 8});
  for (size_t i = 0; i < f.size(); ++i) {
    f[i] = static_cast<float>(rng.NextUniform(-1.0, 1.0));
  }
  const Tensor x_trans = gen.transform_head().Apply(f);
  Tensor up1({1, 16, 16, 3});
  kernels::UpsampleX2(x_trans.data(), up1.data(), 1, 8, 8, 3);
  Tensor up2({1, 32, 32, 3});
  kernels::UpsampleX2(up1.data(), up2.data(), 1, 16, 16, 3);
  const auto levels = gen.RecBase(f);
  // x_trans is clamped to [0,1] and bilinear interpolation preserves that
  // range, so the chain passes through the level clamps untouched.
  for (size_t i = 0; i < up2.size(); ++i) {
    CHECK(levels[1][i] == doctest::Approx(up2[i]).epsilon(1e-6));
  }
}

TEST_CASE("rec_base is deterministic and clamped") {
  Rng rng(803);
  TextureGenerator gen(ToyGeneratorConfig(), ToyExtractorConfig(), rng);
  Tensor f({1, 8});
  for (size_t i = 0; i < f.size(); ++i) {
    f[i] = static_cast<float>(rng.NextUniform(-3.0, 3.0));
  }
  const auto a = gen.RecBase(f);
  const auto b = gen.RecBase(f);
  for (size_t l = 0; l < a.size(); ++l) {
    for (size_t i = 0; i < a[l].size(); ++i) {
      CHECK(a[l][i] == b[l][i]);
      CHECK(a[l][i] >= 0.0f);
      CHECK(a[l][i] <= 1.0f);
    }
  }
}

TEST_CASE("learning-rate schedule decays by 0.9 every 5 epochs to the floor") {
  GeneratorConfig g = ToyGeneratorConfig();
  CHECK(g.LearningRateAt(0) == doctest::Approx(1e-4));
  CHECK(g.LearningRateAt(4) == doctest::Approx(1e-4));
  CHECK(g.LearningRateAt(5) == doctest::Approx(9e-5));
  CHECK(g.LearningRateAt(10) == doctest::Approx(8.1e-5));
  CHECK(g.LearningRateAt(500) == doctest::Approx(1e-5));  // floor
}

TEST_CASE("generator checkpoints restore outputs bitwise") {
  Rng rng(804);
  TextureGenerator gen(ToyGeneratorConfig(), ToyExtractorConfig(), rng);
  const auto restored = TextureGenerator::FromCheckpoint(
      Checkpoint::Deserialize(gen.ToCheckpoint().Serialize()));
  Tensor f({4});
  f.At(0) = 0.3f;
  f.At(1) = -0.8f;
  Tensor f8({8});
  for (int i = 0; i < 4; ++i) f8.At(i) = f.At(i);
  const Tensor a = gen.GenerateBase(f8);
  const Tensor b = restored->GenerateBase(f8);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("target pyramid sizes mirror the generated levels") {
  Rng rng(805);
  TextureGenerator gen(ToyGeneratorConfig(), ToyExtractorConfig(), rng);
  Tensor x({2, 32, 32, 3});
  const auto targets = gen.TargetPyramid(x);
  REQUIRE(targets.size() == 2);
  CHECK(targets[0].dim(1) == 16);
  CHECK(targets[1].dim(1) == 32);
}
