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

#include "sfc/texture_generator.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sfc/kernels.h"
#include "sfc/losses.h"

using json = nlohmann::json;

namespace sfc {

namespace {

Tensor Upsample2(const Tensor& x) {
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  Tensor y({n, h * 2, w * 2, c});
  kernels::UpsampleX2(x.data(), y.data(), n, h, w, c);
  return y;
}

Tensor Clamp01T(const Tensor& x) {
  Tensor y(x.shape());
  kernels::Clamp01Forward(x.data(), y.data(), x.size());
  return y;
}

}  // namespace

TextureGenerator::TextureGenerator(const GeneratorConfig& cfg,
                                   const ExtractorConfig& ecfg, Rng& rng)
    : cfg_(cfg), ecfg_(ecfg) {
  cfg_.Validate();
  Check(cfg_.output_size == ecfg_.transform_size * (1 << cfg_.num_levels),
        "generator output size inconsistent with transform size");
  head_ = BuildTransformHead(ecfg_, rng);
  for (int l = 0; l < cfg_.num_levels; ++l) {
    auto branch = std::make_unique<nn::Sequential>();
    const int f = cfg_.level_filters[static_cast<size_t>(l)];
    branch->Emplace<nn::Conv2d>(3, 3, f, 1, rng);
    branch->Emplace<nn::Relu>();
    branch->Emplace<nn::Conv2d>(3, f, f, 1, rng);
    branch->Emplace<nn::Relu>();
    branch->Emplace<nn::Conv2d>(3, f, 3, 1, rng);
    details_.push_back(std::move(branch));
  }
}

std::vector<Tensor> TextureGenerator::RecBase(const Tensor& f_rec) const {
  Check(f_rec.ndim() == 2 && f_rec.dim(1) == ecfg_.embed_dim,
        "rec_base feature dimension mismatch");
  std::vector<Tensor> levels;
  Tensor x = head_.Apply(f_rec);
  for (int l = 0; l < cfg_.num_levels; ++l) {
    const Tensor u = Upsample2(x);
    const Tensor d = details_[static_cast<size_t>(l)]->Apply(u);
    Tensor s(u.shape());
    for (size_t i = 0; i < s.size(); ++i) s[i] = u[i] + d[i];
    x = Clamp01T(s);
    levels.push_back(x);
  }
  return levels;
}

Tensor TextureGenerator::GenerateBase(const Tensor& f_rec) const {
  Check(f_rec.ndim() == 1, "GenerateBase expects a single feature");
  const auto levels = RecBase(f_rec.Reshaped({1, f_rec.dim(0)}));
  const Tensor& last = levels.back();
  return last.Reshaped({last.dim(1), last.dim(2), last.dim(3)});
}

std::vector<Tensor> TextureGenerator::TargetPyramid(const Tensor& x) const {
  Check(x.ndim() == 4 && x.dim(1) == cfg_.output_size &&
            x.dim(2) == cfg_.output_size,
        "target image size mismatch");
  std::vector<Tensor> targets;
  for (int l = 0; l < cfg_.num_levels; ++l) {
    const int size = ecfg_.transform_size * (1 << (l + 1));
    targets.push_back(ResizeBatch(x, size));
  }
  return targets;
}

std::vector<nn::Parameter*> TextureGenerator::Params() {
  std::vector<nn::Parameter*> out;
  for (size_t l = 0; l < details_.size(); ++l) {
    details_[l]->CollectParams("detail." + std::to_string(l), &out);
  }
  return out;
}

std::vector<nn::Parameter*> TextureGenerator::HeadParams() {
  std::vector<nn::Parameter*> out;
  head_.CollectParams("transform_head", &out);
  return out;
}

Checkpoint TextureGenerator::ToCheckpoint() const {
  json cfg;
  cfg["generator"] = json::parse(cfg_.ToJson());
  cfg["extractor"] = json::parse(ecfg_.ToJson());
  auto* self = const_cast<TextureGenerator*>(this);
  auto params = self->Params();
  const auto head = self->HeadParams();
  params.insert(params.end(), head.begin(), head.end());
  return Checkpoint::FromParams("generator", cfg.dump(), params);
}

std::unique_ptr<TextureGenerator> TextureGenerator::FromCheckpoint(
    const Checkpoint& ck) {
  Check(ck.stage == "generator", "checkpoint is not a generator");
  const json cfg = json::parse(ck.config_json);
  const GeneratorConfig g = GeneratorConfig::FromJson(cfg.at("generator").dump());
  const ExtractorConfig e = ExtractorConfig::FromJson(cfg.at("extractor").dump());
  Rng rng(0);
  auto gen = std::make_unique<TextureGenerator>(g, e, rng);
  auto params = gen->Params();
  const auto head = gen->HeadParams();
  params.insert(params.end(), head.begin(), head.end());
  ck.ToParams(params);
  return gen;
}

void TextureGenerator::InitTransformHeadFrom(FeatureCodec& codec) {
  std::vector<nn::Parameter*> src;
  codec.transform_head().CollectParams("transform_head", &src);
  std::vector<nn::Parameter*> dst;
  head_.CollectParams("transform_head", &dst);
  Check(src.size() == dst.size(), "transform head layout mismatch");
  for (size_t i = 0; i < src.size(); ++i) {
    dst[i]->value = src[i]->value;
  }
}

GeneratorTrainResult TrainGenerator(TextureGenerator* gen,
                                    const BaseExtractor& extractor,
                                    const FeatureCodec& codec,
                                    const LoadedFaces& train,
                                    const LoadedFaces& val, uint64_t seed) {
  const GeneratorConfig& cfg = gen->config();
  const ExtractorConfig& ecfg = extractor.config();
  const int n = train.images.dim(0);
  Check(n > 0, "empty training set");
  const int levels = cfg.num_levels;

  // Decoded features through the frozen base pipeline (inference path).
  const Tensor inputs = ResizeBatch(train.images, ecfg.input_size);
  const Tensor features = extractor.ExtractBatch(inputs);
  Tensor f_rec_all({n, ecfg.embed_dim});
  for (int i = 0; i < n; ++i) {
    f_rec_all.SetSlice(i, codec.DecodeFromCode(codec.EncodeToCode(features.Slice(i))));
  }
  const Tensor ground = ResizeBatch(train.images, cfg.output_size);

  auto params = gen->Params();
  nn::Adam adam(cfg.lr_initial);
  Rng rng(seed);
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  GeneratorTrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    adam.set_learning_rate(cfg.LearningRateAt(epoch));
    rng.Shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, n - start);
      Tensor fb({bs, ecfg.embed_dim});
      Tensor xb({bs, cfg.output_size, cfg.output_size, 3});
      for (int i = 0; i < bs; ++i) {
        const int src = order[static_cast<size_t>(start + i)];
        fb.SetSlice(i, f_rec_all.Slice(src));
        xb.SetSlice(i, ground.Slice(src));
      }
      const auto targets = gen->TargetPyramid(xb);

      nn::Adam::ZeroGrads(params);
      // Stored forward through the pyramid; the transform head stays frozen.
      Tensor x = gen->transform_head().Apply(fb);
      std::vector<Tensor> pre_clamp(static_cast<size_t>(levels));
      std::vector<Tensor> level_out(static_cast<size_t>(levels));
      for (int l = 0; l < levels; ++l) {
        const Tensor u = Upsample2(x);
        const Tensor d = gen->detail_branch(l).ForwardStored(u);
        Tensor s(u.shape());
        for (size_t i = 0; i < s.size(); ++i) s[i] = u[i] + d[i];
        pre_clamp[static_cast<size_t>(l)] = s;
        x = Clamp01T(s);
        level_out[static_cast<size_t>(l)] = x;
      }

      std::vector<Tensor> grad_levels;
      const double loss = GeneratorLoss(level_out, targets, &grad_levels);
      epoch_loss += loss;
      ++batches;

      Tensor g_x;  // gradient flowing into level l's output
      for (int l = levels - 1; l >= 0; --l) {
        Tensor g_out = grad_levels[static_cast<size_t>(l)];
        if (!g_x.empty()) {
          for (size_t i = 0; i < g_out.size(); ++i) g_out[i] += g_x[i];
        }
        const Tensor& s = pre_clamp[static_cast<size_t>(l)];
        Tensor g_s(s.shape());
        kernels::Clamp01Backward(s.data(), g_out.data(), g_s.data(), s.size());
        const Tensor g_u_detail = gen->detail_branch(l).BackwardStored(g_s);
        Tensor g_u(g_s.shape());
        for (size_t i = 0; i < g_u.size(); ++i) g_u[i] = g_s[i] + g_u_detail[i];
        const int uh = g_u.dim(1) / 2, uw = g_u.dim(2) / 2;
        g_x = Tensor({bs, uh, uw, 3});
        kernels::UpsampleX2Backward(g_u.data(), g_x.data(), bs, uh, uw, 3);
      }

      adam.Step(params);
    }
    result.log.push_back({epoch, epoch_loss / batches, adam.learning_rate()});
  }

  // Validation loss through the same frozen pipeline.
  const Tensor vin = ResizeBatch(val.images, ecfg.input_size);
  const Tensor vfeat = extractor.ExtractBatch(vin);
  Tensor vrec({vfeat.dim(0), ecfg.embed_dim});
  for (int i = 0; i < vfeat.dim(0); ++i) {
    vrec.SetSlice(i, codec.DecodeFromCode(codec.EncodeToCode(vfeat.Slice(i))));
  }
  const Tensor vx = ResizeBatch(val.images, cfg.output_size);
  const auto vlevels = gen->RecBase(vrec);
  const auto vtargets = gen->TargetPyramid(vx);
  result.val_loss = GeneratorLoss(vlevels, vtargets);
  return result;
}

}  // namespace sfc
