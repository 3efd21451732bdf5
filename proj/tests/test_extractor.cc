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

#include "sfc/extractor.h"
#include "sfc/facegen.h"

using namespace sfc;

namespace {

ExtractorConfig TinyConfig() {
  ExtractorConfig e;
  e.backbone = {{3, 8, 2}, {3, 16, 2}};
  e.embed_dim = 8;
  e.num_classes = 3;
  e.input_size = 16;
  e.transform_size = 8;
  e.head_seed_channels = 8;
  e.head = {{3, 8, 2}, {3, 3, 2}};
  e.lambda_s = 50.0;
  e.learning_rate = 3e-3;  // desk-scale rate; paper default stays 1e-4
  e.epochs = 80;
  e.batch_size = 8;
  return e;
}

LoadedFaces TinyFaces(int identities, int per_identity, int size,
                      uint64_t seed) {
  LoadedFaces out;
  out.size = size;
  out.images = Tensor({identities * per_identity, size, size, 3});
  Rng rng(seed);
  for (int id = 0; id < identities; ++id) {
    const uint64_t id_seed = rng.NextU64();
    for (int i = 0; i < per_identity; ++i) {
      out.images.SetSlice(id * per_identity + i,
                          RenderToyFace(id_seed, rng.NextU64(), size));
      out.labels.push_back(id);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("extract is deterministic and respects the resolution contract") {
  Rng rng(900);
  BaseExtractor model(TinyConfig(), rng);
  const LoadedFaces faces = TinyFaces(2, 2, 16, 31);
  const Tensor f1 = model.Extract(faces.images.Slice(0));
  const Tensor f2 = model.Extract(faces.images.Slice(0));
  CHECK(f1.dim(0) == 8);
  for (size_t i = 0; i < f1.size(); ++i) CHECK(f1[i] == f2[i]);
  CHECK_THROWS_AS(model.Extract(Tensor({8, 8, 3})), InvalidArgumentError);
}

TEST_CASE("verification logits produce a valid softmax") {
  Rng rng(901);
  BaseExtractor model(TinyConfig(), rng);
  const LoadedFaces faces = TinyFaces(2, 2, 16, 32);
  const Tensor f = model.ExtractBatch(faces.images);
  const Tensor logits = model.VerificationLogits(f);
  CHECK(logits.dim(1) == 3);
  for (int i = 0; i < logits.dim(0); ++i) {
    long double sum = 0.0L, denom = 0.0L;
    for (int j = 0; j < 3; ++j) denom += expl(static_cast<long double>(logits.At(i, j)));
    for (int j = 0; j < 3; ++j) {
      sum += expl(static_cast<long double>(logits.At(i, j))) / denom;
    }
    CHECK(static_cast<double>(sum) == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("feature structure transform emits a clamped 3-channel map") {
  Rng rng(902);
  BaseExtractor model(TinyConfig(), rng);
  Tensor f({2, 8});
  for (size_t i = 0; i < f.size(); ++i) {
    f[i] = static_cast<float>(rng.NextUniform(-2.0, 2.0));
  }
  const Tensor x = model.FeatureStructureTransform(f);
  CHECK(x.dim(1) == 8);
  CHECK(x.dim(2) == 8);
  CHECK(x.dim(3) == 3);
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i] >= 0.0f);
    CHECK(x[i] <= 1.0f);
  }
}

TEST_CASE("toy training halves the multi-task loss and is seed-reproducible") {
  const LoadedFaces faces = TinyFaces(3, 12, 16, 33);

  Rng init1(903);
  BaseExtractor m1(TinyConfig(), init1);
  const auto r1 = TrainExtractor(&m1, faces, 77);
  REQUIRE(r1.log.size() == 80);
  CHECK(r1.log.back().loss < 0.5 * r1.log.front().loss);
  CHECK(r1.final_train_accuracy > 0.85);

  // Same seeds, fresh model: bitwise-identical first-epoch loss.
  Rng init2(903);
  BaseExtractor m2(TinyConfig(), init2);
  const auto r2 = TrainExtractor(&m2, faces, 77);
  CHECK(r1.log.front().loss == r2.log.front().loss);
  CHECK(r1.log.back().loss == r2.log.back().loss);

  // Learned features separate identities: intra-identity cosine distance
  // sits below inter-identity distance on this training split.
  const Tensor f = m1.ExtractBatch(faces.images);
  auto cosd = [&](int a, int b) {
    double dot = 0, na = 0, nb = 0;
    for (int j = 0; j < 8; ++j) {
      dot += static_cast<double>(f.At(a, j)) * f.At(b, j);
      na += static_cast<double>(f.At(a, j)) * f.At(a, j);
      nb += static_cast<double>(f.At(b, j)) * f.At(b, j);
    }
    return 1.0 - dot / std::sqrt(na * nb);
  };
  double intra = 0, inter = 0;
  int intra_n = 0, inter_n = 0;
  const int n = f.dim(0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (faces.labels[static_cast<size_t>(a)] == faces.labels[static_cast<size_t>(b)]) {
        intra += cosd(a, b);
        ++intra_n;
      } else {
        inter += cosd(a, b);
        ++inter_n;
      }
    }
  }
  CHECK(intra / intra_n < inter / inter_n);
}

TEST_CASE("training rejects unusable datasets") {
  Rng rng(904);
  BaseExtractor model(TinyConfig(), rng);
  LoadedFaces single = TinyFaces(1, 4, 16, 35);
  CHECK_THROWS_AS(TrainExtractor(&model, single, 1), InvalidArgumentError);
}

TEST_CASE("extractor checkpoints restore features bitwise") {
  Rng rng(905);
  BaseExtractor model(TinyConfig(), rng);
  const auto restored =
      BaseExtractor::FromCheckpoint(Checkpoint::Deserialize(
          model.ToCheckpoint().Serialize()));
  const LoadedFaces faces = TinyFaces(2, 1, 16, 36);
  const Tensor a = model.Extract(faces.images.Slice(0));
  const Tensor b = restored->Extract(faces.images.Slice(0));
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
