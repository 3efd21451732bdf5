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

#include "sfc/feature_codec.h"

using namespace sfc;

namespace {

ExtractorConfig ToyExtractorConfig() {
  ExtractorConfig e;
  e.backbone = {{3, 8, 2}, {3, 16, 2}};
  e.embed_dim = 8;
  e.num_classes = 3;
  e.input_size = 16;
  e.transform_size = 8;
  e.head_seed_channels = 8;
  e.head = {{3, 8, 2}, {3, 3, 2}};
  return e;
}

FeatureCodecConfig ToyCodecConfig() {
  FeatureCodecConfig c;
  c.feature_dim = 8;
  c.hidden_widths = {12, 12};
  c.latent_dim = 8;
  return c;
}

Tensor RandomFeature(int d, Rng& rng, double scale = 1.0) {
  Tensor f({d});
  for (int i = 0; i < d; ++i) {
    f.At(i) = static_cast<float>(rng.NextUniform(-scale, scale));
  }
  return f;
}

}  // namespace

TEST_CASE("inference quantization clips then rounds ties away from zero") {
  Tensor latent({3});
  latent[0] = 20.7f;
  latent[1] = -25.0f;
  latent[2] = 0.4f;
  const LatentCode code = QuantizeInfer(latent, 20.0);
  CHECK(code.symbols == std::vector<int32_t>{20, -20, 0});

  Tensor ties({4});
  ties[0] = 0.5f;
  ties[1] = -0.5f;
  ties[2] = 1.5f;
  ties[3] = -2.5f;
  const LatentCode t = QuantizeInfer(ties, 20.0);
  CHECK(t.symbols == std::vector<int32_t>{1, -1, 2, -3});
}

TEST_CASE("train-mode quantization stays within the noise half-width") {
  Rng rng(500);
  Tensor latent({64});
  for (size_t i = 0; i < latent.size(); ++i) {
    latent[i] = static_cast<float>(rng.NextUniform(-30.0, 30.0));
  }
  const Tensor clipped = ClipLatent(latent, 20.0);
  const Tensor noisy = QuantizeTrain(latent, 20.0, 0.5, rng);
  for (size_t i = 0; i < latent.size(); ++i) {
    CHECK(std::fabs(noisy[i] - clipped[i]) <= 0.5f);
    CHECK(std::fabs(clipped[i]) <= 20.0f);
  }
}

TEST_CASE("train-mode noise is unbiased over 1e5 draws") {
  Rng rng(501);
  Tensor zero({1});
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    sum += QuantizeTrain(zero, 20.0, 0.5, rng)[0];
  }
  CHECK(std::fabs(sum / draws) < 0.01);
}

TEST_CASE("enc/dec are deterministic and shape-checked") {
  Rng rng(502);
  FeatureCodec codec(ToyCodecConfig(), ToyExtractorConfig(), rng);
  Tensor f({2, 8});
  for (size_t i = 0; i < f.size(); ++i) {
    f[i] = static_cast<float>(rng.NextUniform(-1.0, 1.0));
  }
  const Tensor y1 = codec.EncBase(f);
  const Tensor y2 = codec.EncBase(f);
  CHECK(y1.dim(1) == 8);
  for (size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);

  const Tensor r1 = codec.DecBase(y1);
  const Tensor r2 = codec.DecBase(y1);
  CHECK(r1.dim(1) == 8);
  for (size_t i = 0; i < r1.size(); ++i) CHECK(r1[i] == r2[i]);

  CHECK_THROWS_AS(codec.EncBase(Tensor({2, 9})), InvalidArgumentError);
  CHECK_THROWS_AS(codec.DecBase(Tensor({2, 9})), InvalidArgumentError);
}

TEST_CASE("identity-configured single-layer path passes features through") {
  // One linear layer, identity-initialized, GDN effectively disabled: the
  // degenerate analysis transform is a pass-through.
  Rng rng(503);
  FeatureCodecConfig cfg;
  cfg.feature_dim = 8;
  cfg.hidden_widths = {};
  cfg.latent_dim = 8;
  FeatureCodec codec(cfg, ToyExtractorConfig(), rng);
  auto params = codec.Params();
  for (auto* p : params) {
    if (p->name == "enc.0.w") {
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) p->value.At(i, j) = (i == j) ? 1.0f : 0.0f;
      }
    }
    if (p->name == "enc.0.b") {
      for (int i = 0; i < 8; ++i) p->value.At(i) = 0.0f;
    }
  }
  const Tensor f = RandomFeature(8, rng).Reshaped({1, 8});
  const Tensor y = codec.EncBase(f);
  for (size_t i = 0; i < f.size(); ++i) {
    CHECK(y[i] == doctest::Approx(f[i]).epsilon(1e-6));
  }
}

TEST_CASE("entropy coding never changes symbols end to end") {
  Rng rng(504);
  FeatureCodec codec(ToyCodecConfig(), ToyExtractorConfig(), rng);
  // A symbol model fitted on arbitrary codes is enough for transport.
  std::vector<LatentCode> training;
  for (int i = 0; i < 32; ++i) {
    training.push_back(codec.EncodeToCode(RandomFeature(8, rng, 2.0)));
  }
  codec.SetSymbolModel(SymbolModel::Fit(training, SymbolModelMode::kPerDimension,
                                        20, 8));
  for (int rep = 0; rep < 200; ++rep) {
    const Tensor f = RandomFeature(8, rng, 3.0);
    const LatentCode direct = codec.EncodeToCode(f);
    const Bytes payload = codec.EncodeFeature(f);
    const LatentCode transported = EntropyDecode(payload, codec.symbol_model());
    CHECK(transported.symbols == direct.symbols);
    // dec_base of transported symbols is bitwise the direct reconstruction.
    const Tensor a = codec.DecodeFromCode(direct);
    const Tensor b = codec.DecodeFeature(payload);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("codec checkpoints restore behaviour and the symbol model") {
  Rng rng(505);
  FeatureCodec codec(ToyCodecConfig(), ToyExtractorConfig(), rng);
  std::vector<LatentCode> training;
  for (int i = 0; i < 16; ++i) {
    training.push_back(codec.EncodeToCode(RandomFeature(8, rng)));
  }
  codec.SetSymbolModel(SymbolModel::Fit(training, SymbolModelMode::kShared, 20, 8));

  const Checkpoint ck = codec.ToCheckpoint();
  const auto restored = FeatureCodec::FromCheckpoint(
      Checkpoint::Deserialize(ck.Serialize()));
  const Tensor f = RandomFeature(8, rng);
  const Bytes p1 = codec.EncodeFeature(f);
  const Bytes p2 = restored->EncodeFeature(f);
  CHECK(p1 == p2);
  const Tensor d1 = codec.DecodeFeature(p1);
  const Tensor d2 = restored->DecodeFeature(p2);
  for (size_t i = 0; i < d1.size(); ++i) CHECK(d1[i] == d2[i]);
}

TEST_CASE("paper constants hold in the default feature codec config") {
  const FeatureCodecConfig cfg;
  CHECK(cfg.r_clip == 20.0);
  CHECK(cfg.noise_half_width == 0.5);
}
