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

#ifndef SFC_TEXTURE_GENERATOR_H_
#define SFC_TEXTURE_GENERATOR_H_

#include <memory>
#include <vector>

#include "sfc/checkpoint.h"
#include "sfc/config.h"
#include "sfc/dataset.h"
#include "sfc/feature_codec.h"

namespace sfc {

// Coarse-to-fine texture synthesis from the decoded feature: the frozen
// fine-tuned feature-structure transform seeds the pyramid, then each level
// bilinearly upsamples the previous one and adds a learned detail branch
// (two 3x3 conv layers + a 3-filter projection), clamped to [0, 1].
class TextureGenerator {
 public:
  TextureGenerator(const GeneratorConfig& cfg, const ExtractorConfig& ecfg,
                   Rng& rng);

  const GeneratorConfig& config() const { return cfg_; }

  // All pyramid levels for a batch of decoded features (N, D); level l of the
  // result has spatial size transform_size * 2^(l+1) ... output_size. The
  // last level is x_base.
  std::vector<Tensor> RecBase(const Tensor& f_rec) const;
  // Convenience: final level only, for a single feature (D) -> (S, S, 3).
  Tensor GenerateBase(const Tensor& f_rec) const;

  // Ground-truth pyramid targets: bicubic downsampling of x to each level
  // size; the last target is x itself.
  std::vector<Tensor> TargetPyramid(const Tensor& x) const;

  nn::Sequential& transform_head() { return head_; }
  nn::Sequential& detail_branch(int level) { return *details_[static_cast<size_t>(level)]; }
  std::vector<nn::Parameter*> Params();        // pyramid stages only
  std::vector<nn::Parameter*> HeadParams();    // frozen transform head

  Checkpoint ToCheckpoint() const;
  static std::unique_ptr<TextureGenerator> FromCheckpoint(const Checkpoint& ck);

  // Installs the fine-tuned transform head from a trained feature codec.
  void InitTransformHeadFrom(FeatureCodec& codec);

 private:
  GeneratorConfig cfg_;
  ExtractorConfig ecfg_;
  nn::Sequential head_;  // frozen during generator training
  std::vector<std::unique_ptr<nn::Sequential>> details_;
};

struct GeneratorTrainResult {
  std::vector<EpochLog> log;
  double val_loss = 0.0;  // mean multi-scale SATD on the validation split
};

// Trains the pyramid stages against ground-truth images, with f_rec produced
// by the frozen extractor + feature codec. Learning rate decays by the
// configured factor every lr_decay_every epochs, floored at lr_floor.
GeneratorTrainResult TrainGenerator(TextureGenerator* gen,
                                    const BaseExtractor& extractor,
                                    const FeatureCodec& codec,
                                    const LoadedFaces& train,
                                    const LoadedFaces& val, uint64_t seed);

}  // namespace sfc

#endif  // SFC_TEXTURE_GENERATOR_H_
