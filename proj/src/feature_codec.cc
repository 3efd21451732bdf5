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

#include "sfc/feature_codec.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sfc/losses.h"

using json = nlohmann::json;

namespace sfc {

Tensor ClipLatent(const Tensor& latent, double r_clip) {
  Tensor out(latent.shape());
  const float r = static_cast<float>(r_clip);
  for (size_t i = 0; i < latent.size(); ++i) {
    out[i] = std::clamp(latent[i], -r, r);
  }
  return out;
}

Tensor QuantizeTrain(const Tensor& latent, double r_clip,
                     double noise_half_width, Rng& rng) {
  Tensor out = ClipLatent(latent, r_clip);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] += static_cast<float>(
        rng.NextUniform(-noise_half_width, noise_half_width));
  }
  return out;
}

LatentCode QuantizeInfer(const Tensor& latent, double r_clip) {
  Check(latent.ndim() == 1, "QuantizeInfer expects a single latent vector");
  LatentCode code;
  code.symbols.resize(latent.size());
  const float r = static_cast<float>(r_clip);
  for (size_t i = 0; i < latent.size(); ++i) {
    const float v = std::clamp(latent[i], -r, r);
    code.symbols[i] = static_cast<int32_t>(std::lround(v));  // ties away from 0
  }
  return code;
}

FeatureCodec::FeatureCodec(const FeatureCodecConfig& cfg,
                           const ExtractorConfig& ecfg, Rng& rng)
    : cfg_(cfg), ecfg_(ecfg) {
  cfg_.Validate();
  Check(cfg_.feature_dim == ecfg_.embed_dim,
        "feature codec dim must match extractor embedding");
  // Analysis: D -> h0 (GDN) -> h1 (GDN) -> M. Synthesis mirrors with IGDN.
  int in = cfg_.feature_dim;
  for (int width : cfg_.hidden_widths) {
    enc_.Emplace<nn::Linear>(in, width, rng);
    enc_.Emplace<nn::Gdn>(width, /*inverse=*/false);
    in = width;
  }
  enc_.Emplace<nn::Linear>(in, cfg_.latent_dim, rng);

  in = cfg_.latent_dim;
  for (auto it = cfg_.hidden_widths.rbegin(); it != cfg_.hidden_widths.rend();
       ++it) {
    dec_.Emplace<nn::Linear>(in, *it, rng);
    dec_.Emplace<nn::Gdn>(*it, /*inverse=*/true);
    in = *it;
  }
  dec_.Emplace<nn::Linear>(in, cfg_.feature_dim, rng);

  head_ = BuildTransformHead(ecfg_, rng);
}

Tensor FeatureCodec::EncBase(const Tensor& f) const {
  Check(f.ndim() == 2 && f.dim(1) == cfg_.feature_dim,
        "enc_base dimension mismatch");
  return enc_.Apply(f);
}

Tensor FeatureCodec::DecBase(const Tensor& latent) const {
  Check(latent.ndim() == 2 && latent.dim(1) == cfg_.latent_dim,
        "dec_base dimension mismatch");
  return dec_.Apply(latent);
}

LatentCode FeatureCodec::EncodeToCode(const Tensor& f) const {
  Check(f.ndim() == 1 && f.dim(0) == cfg_.feature_dim,
        "EncodeToCode expects a single feature");
  const Tensor y = EncBase(f.Reshaped({1, cfg_.feature_dim}));
  return QuantizeInfer(y.Reshaped({cfg_.latent_dim}), cfg_.r_clip);
}

Tensor FeatureCodec::DecodeFromCode(const LatentCode& code) const {
  Check(static_cast<int>(code.symbols.size()) == cfg_.latent_dim,
        "code length mismatch");
  Tensor latent({1, cfg_.latent_dim});
  for (int i = 0; i < cfg_.latent_dim; ++i) {
    latent[static_cast<size_t>(i)] = static_cast<float>(code.symbols[static_cast<size_t>(i)]);
  }
  return DecBase(latent).Reshaped({cfg_.feature_dim});
}

const SymbolModel& FeatureCodec::symbol_model() const {
  if (!symbol_model_) {
    throw DependencyError("feature codec has no fitted symbol model");
  }
  return *symbol_model_;
}

void FeatureCodec::SetSymbolModel(SymbolModel model) {
  symbol_model_ = std::make_unique<SymbolModel>(std::move(model));
}

Bytes FeatureCodec::EncodeFeature(const Tensor& f) const {
  return EntropyEncode(EncodeToCode(f), symbol_model());
}

Tensor FeatureCodec::DecodeFeature(const Bytes& payload) const {
  return DecodeFromCode(EntropyDecode(payload, symbol_model()));
}

Tensor FeatureCodec::TransformFromFeature(const Tensor& f_rec) const {
  return head_.Apply(f_rec);
}

std::vector<nn::Parameter*> FeatureCodec::Params() {
  std::vector<nn::Parameter*> out;
  enc_.CollectParams("enc", &out);
  dec_.CollectParams("dec", &out);
  head_.CollectParams("transform_head", &out);
  return out;
}

Checkpoint FeatureCodec::ToCheckpoint() const {
  json cfg;
  cfg["codec"] = json::parse(cfg_.ToJson());
  cfg["extractor"] = json::parse(ecfg_.ToJson());
  auto* self = const_cast<FeatureCodec*>(this);
  Checkpoint ck = Checkpoint::FromParams("feature_codec", cfg.dump(), self->Params());
  if (symbol_model_) ck.blobs["symbol_model"] = symbol_model_->Serialize();
  return ck;
}

std::unique_ptr<FeatureCodec> FeatureCodec::FromCheckpoint(const Checkpoint& ck) {
  Check(ck.stage == "feature_codec", "checkpoint is not a feature codec");
  const json cfg = json::parse(ck.config_json);
  const FeatureCodecConfig c = FeatureCodecConfig::FromJson(cfg.at("codec").dump());
  const ExtractorConfig e = ExtractorConfig::FromJson(cfg.at("extractor").dump());
  Rng rng(0);
  auto codec = std::make_unique<FeatureCodec>(c, e, rng);
  ck.ToParams(codec->Params());
  auto blob = ck.blobs.find("symbol_model");
  if (blob != ck.blobs.end()) {
    ByteReader r(blob->second);
    codec->SetSymbolModel(SymbolModel::Deserialize(r));
  }
  return codec;
}

void FeatureCodec::InitTransformHeadFrom(BaseExtractor& extractor) {
  std::vector<nn::Parameter*> src;
  extractor.transform_head().CollectParams("transform_head", &src);
  std::vector<nn::Parameter*> dst;
  head_.CollectParams("transform_head", &dst);
  Check(src.size() == dst.size(), "transform head layout mismatch");
  for (size_t i = 0; i < src.size(); ++i) {
    Check(src[i]->value.SameShape(dst[i]->value), "transform head shape mismatch");
    dst[i]->value = src[i]->value;
  }
}

FeatureCodecTrainResult TrainFeatureCodec(FeatureCodec* codec,
                                          const BaseExtractor& extractor,
                                          const LoadedFaces& train,
                                          const LoadedFaces& val,
                                          double lambda1, double lambda2,
                                          uint64_t seed) {
  const FeatureCodecConfig& cfg = codec->config();
  const ExtractorConfig& ecfg = extractor.config();
  const int n = train.images.dim(0);
  Check(n > 0, "empty training set");

  // Frozen-extractor features and thumbnail targets, computed once.
  const Tensor inputs = ResizeBatch(train.images, ecfg.input_size);
  const Tensor features = extractor.ExtractBatch(inputs);
  const Tensor x_s_all = ResizeBatch(train.images, ecfg.transform_size);

  auto params = codec->Params();
  nn::Adam adam(cfg.learning_rate);
  Rng rng(seed);
  Rng noise_rng = rng.Fork("quantizer-noise");

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  FeatureCodecTrainResult result;
  const int dim = cfg.feature_dim;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.Shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, n - start);
      Tensor fb({bs, dim});
      Tensor xs({bs, ecfg.transform_size, ecfg.transform_size, 3});
      for (int i = 0; i < bs; ++i) {
        const int src = order[static_cast<size_t>(start + i)];
        fb.SetSlice(i, features.Slice(src));
        xs.SetSlice(i, x_s_all.Slice(src));
      }

      nn::Adam::ZeroGrads(params);
      Tensor y = codec->enc().ForwardStored(fb);
      Tensor c_noisy = QuantizeTrain(y, cfg.r_clip, cfg.noise_half_width,
                                     noise_rng);
      Tensor f_rec = codec->dec().ForwardStored(c_noisy);
      Tensor x_trans = codec->transform_head().ForwardStored(f_rec);

      const Tensor& rate_carrier = cfg.l1_on_noisy ? c_noisy : y;
      Tensor g_frec, g_c, g_xtrans;
      const auto parts =
          FeatureCodecLoss(fb, f_rec, rate_carrier, xs, x_trans, lambda1,
                           lambda2, &g_frec, &g_c, &g_xtrans);
      epoch_loss += parts.total;
      ++batches;

      Tensor g_frec_total = codec->transform_head().BackwardStored(g_xtrans);
      for (size_t i = 0; i < g_frec_total.size(); ++i) {
        g_frec_total[i] += g_frec[i];
      }
      Tensor g_latent = codec->dec().BackwardStored(g_frec_total);
      if (cfg.l1_on_noisy) {
        for (size_t i = 0; i < g_latent.size(); ++i) g_latent[i] += g_c[i];
      }
      // Straight-through clipping: pass inside [-r, r], zero outside.
      const float r = static_cast<float>(cfg.r_clip);
      for (size_t i = 0; i < g_latent.size(); ++i) {
        if (y[i] < -r || y[i] > r) g_latent[i] = 0.0f;
      }
      if (!cfg.l1_on_noisy) {
        for (size_t i = 0; i < g_latent.size(); ++i) g_latent[i] += g_c[i];
      }
      codec->enc().BackwardStored(g_latent);

      adam.Step(params);
      codec->enc().Project();
      codec->dec().Project();
      codec->transform_head().Project();
    }
    result.log.push_back({epoch, epoch_loss / batches, cfg.learning_rate});
  }

  // Fit the symbol model on training codes.
  std::vector<LatentCode> codes;
  codes.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    codes.push_back(codec->EncodeToCode(features.Slice(i)));
  }
  const auto mode = cfg.symbol_model == "shared" ? SymbolModelMode::kShared
                                                 : SymbolModelMode::kPerDimension;
  codec->SetSymbolModel(SymbolModel::Fit(codes, mode,
                                         static_cast<int>(cfg.r_clip),
                                         cfg.latent_dim));

  // Validation statistics on held-out features.
  const Tensor vin = ResizeBatch(val.images, ecfg.input_size);
  const Tensor vfeat = extractor.ExtractBatch(vin);
  const int vn = vfeat.dim(0);
  double fid = 0.0, rel = 0.0, bits = 0.0;
  for (int i = 0; i < vn; ++i) {
    const Tensor f = vfeat.Slice(i);
    const LatentCode code = codec->EncodeToCode(f);
    const Tensor f_rec = codec->DecodeFromCode(code);
    double d2 = 0.0, n2 = 0.0;
    for (size_t j = 0; j < f.size(); ++j) {
      const double d = static_cast<double>(f[j]) - f_rec[j];
      d2 += d * d;
      n2 += static_cast<double>(f[j]) * f[j];
    }
    fid += d2;
    rel += std::sqrt(d2) / std::max(std::sqrt(n2), 1e-12);
    bits += ShannonBits(code, codec->symbol_model());
  }
  result.val_fidelity = fid / vn;
  result.val_relative_error = rel / vn;
  result.mean_code_bits = bits / vn;
  return result;
}

}  // namespace sfc
