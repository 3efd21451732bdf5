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

#ifndef SFC_EXTRACTOR_H_
#define SFC_EXTRACTOR_H_

#include <memory>
#include <string>
#include <vector>

#include "sfc/checkpoint.h"
#include "sfc/config.h"
#include "sfc/dataset.h"
#include "sfc/nn.h"
#include "sfc/rng.h"
#include "sfc/tensor.h"

namespace sfc {

// Feature-to-texture head: Linear seed + deconvolution stack + [0,1] clamp.
// Built once for the extractor, cloned and fine-tuned by the feature codec,
// then reused frozen by the texture generator.
nn::Sequential BuildTransformHead(const ExtractorConfig& cfg, Rng& rng);

// Multi-task face feature extractor: conv backbone -> pooled embedding, with
// a softmax verification head and the feature-structure transform head.
class BaseExtractor {
 public:
  BaseExtractor(const ExtractorConfig& cfg, Rng& rng);

  const ExtractorConfig& config() const { return cfg_; }

  // Inference (thread-safe on frozen weights). Images are (N, S, S, C) in
  // [0, 1] at the configured input size.
  Tensor ExtractBatch(const Tensor& images) const;
  Tensor Extract(const Tensor& image) const;  // (S, S, C) -> (D)
  Tensor VerificationLogits(const Tensor& features) const;  // (N,D)->(N,classes)
  Tensor FeatureStructureTransform(const Tensor& features) const;  // ->(N,h,w,3)

  // Training access.
  nn::Sequential& trunk() { return trunk_; }
  nn::Sequential& class_head() { return class_head_; }
  nn::Sequential& transform_head() { return transform_head_; }
  std::vector<nn::Parameter*> Params();

  Checkpoint ToCheckpoint() const;
  static std::unique_ptr<BaseExtractor> FromCheckpoint(const Checkpoint& ck);

 private:
  ExtractorConfig cfg_;
  nn::Sequential trunk_;           // convs + pool + embedding linear
  nn::Sequential class_head_;      // single linear to num_classes
  nn::Sequential transform_head_;  // feature-structure transform
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double learning_rate = 0.0;
};

struct ExtractorTrainResult {
  std::vector<EpochLog> log;
  double final_train_accuracy = 0.0;
};

// Bicubic batch resize helper shared by the pipeline: (N,H,W,C) -> (N,s,s,C),
// clamped to [0, 1].
Tensor ResizeBatch(const Tensor& images, int target_size);

// Adam at the configured fixed learning rate, batch-summed Eq.-style
// multi-task loss. Deterministic given the seed. Throws InvalidArgumentError
// on an empty dataset or fewer than two classes.
ExtractorTrainResult TrainExtractor(BaseExtractor* model,
                                    const LoadedFaces& train, uint64_t seed);

}  // namespace sfc

#endif  // SFC_EXTRACTOR_H_
