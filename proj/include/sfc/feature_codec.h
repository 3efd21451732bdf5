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

#ifndef SFC_FEATURE_CODEC_H_
#define SFC_FEATURE_CODEC_H_

#include <memory>
#include <vector>

#include "sfc/checkpoint.h"
#include "sfc/config.h"
#include "sfc/dataset.h"
#include "sfc/entropy.h"
#include "sfc/extractor.h"
#include "sfc/nn.h"
#include "sfc/rng.h"

namespace sfc {

// Elementwise clip to [-r_clip, r_clip].
Tensor ClipLatent(const Tensor& latent, double r_clip);

// Training-time quantization surrogate: clip, then i.i.d. uniform noise in
// [-noise_half_width, noise_half_width]. Returns reals.
Tensor QuantizeTrain(const Tensor& latent, double r_clip,
                     double noise_half_width, Rng& rng);

// Inference quantization: clip, then round to nearest integer, ties away from
// zero. Latent must be a single vector (M).
LatentCode QuantizeInfer(const Tensor& latent, double r_clip);

// End-to-end learned feature compressor: three fully-connected layers with
// GDN activations on the analysis side, mirrored IGDN synthesis, clipped
// quantization, range-coded symbols.
class FeatureCodec {
 public:
  FeatureCodec(const FeatureCodecConfig& cfg, const ExtractorConfig& ecfg,
               Rng& rng);

  const FeatureCodecConfig& config() const { return cfg_; }

  // Inference (thread-safe on frozen weights).
  Tensor EncBase(const Tensor& f) const;       // (N,D) -> (N,M), pre-quantization
  Tensor DecBase(const Tensor& latent) const;  // (N,M) -> (N,D)
  LatentCode EncodeToCode(const Tensor& f) const;  // (D) -> symbols
  Tensor DecodeFromCode(const LatentCode& code) const;  // symbols -> (D)

  // Serialized base-layer payload (symbol-model ID + length + range-coded
  // payload + CRC-32C). Requires a fitted symbol model.
  Bytes EncodeFeature(const Tensor& f) const;
  Tensor DecodeFeature(const Bytes& payload) const;

  // The feature-structure transform fine-tuned jointly with the codec.
  Tensor TransformFromFeature(const Tensor& f_rec) const;

  nn::Sequential& enc() { return enc_; }
  nn::Sequential& dec() { return dec_; }
  nn::Sequential& transform_head() { return head_; }
  std::vector<nn::Parameter*> Params();

  bool has_symbol_model() const { return symbol_model_ != nullptr; }
  const SymbolModel& symbol_model() const;
  void SetSymbolModel(SymbolModel model);

  Checkpoint ToCheckpoint() const;
  static std::unique_ptr<FeatureCodec> FromCheckpoint(const Checkpoint& ck);

  // Copies transform-head weights from a trained extractor (the fine-tuning
  // initialization).
  void InitTransformHeadFrom(BaseExtractor& extractor);

 private:
  FeatureCodecConfig cfg_;
  ExtractorConfig ecfg_;
  nn::Sequential enc_;
  nn::Sequential dec_;
  nn::Sequential head_;
  std::unique_ptr<SymbolModel> symbol_model_;
};

struct FeatureCodecTrainResult {
  std::vector<EpochLog> log;
  double val_fidelity = 0.0;        // mean ||f_raw - f_rec||^2 on val features
  double val_relative_error = 0.0;  // mean ||f_raw - f_rec|| / ||f_raw||
  double mean_code_bits = 0.0;      // fitted-model estimate per feature
};

// Trains the codec at one (lambda1, lambda2) operating point against a frozen
// extractor, fine-tuning the transform head, then fits the symbol model on
// the training codes.
FeatureCodecTrainResult TrainFeatureCodec(FeatureCodec* codec,
                                          const BaseExtractor& extractor,
                                          const LoadedFaces& train,
                                          const LoadedFaces& val,
                                          double lambda1, double lambda2,
                                          uint64_t seed);

}  // namespace sfc

#endif  // SFC_FEATURE_CODEC_H_
