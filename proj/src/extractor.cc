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

#include "sfc/extractor.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sfc/kernels.h"
#include "sfc/losses.h"

namespace sfc {

nn::Sequential BuildTransformHead(const ExtractorConfig& cfg, Rng& rng) {
  int up = 1;
  for (const auto& s : cfg.head) up *= s.stride;
  const int seed_size = cfg.transform_size / up;
  Check(seed_size * up == cfg.transform_size, "head strides do not divide transform size");

  nn::Sequential head;
  head.Emplace<nn::Linear>(cfg.embed_dim,
                           seed_size * seed_size * cfg.head_seed_channels, rng);
  head.Emplace<nn::ReshapeToMap>(seed_size, seed_size, cfg.head_seed_channels);
  int in_ch = cfg.head_seed_channels;
  for (size_t i = 0; i < cfg.head.size(); ++i) {
    const auto& s = cfg.head[i];
    head.Emplace<nn::ConvTranspose2d>(s.kernel, in_ch, s.filters, s.stride, rng);
    if (i + 1 < cfg.head.size()) head.Emplace<nn::Relu>();
    in_ch = s.filters;
  }
  head.Emplace<nn::Clamp01>();
  return head;
}

BaseExtractor::BaseExtractor(const ExtractorConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.Validate();
  Check(cfg_.num_classes >= 2, "extractor needs at least two classes");
  int in_ch = cfg_.channels;
  for (const auto& s : cfg_.backbone) {
    trunk_.Emplace<nn::Conv2d>(s.kernel, in_ch, s.filters, s.stride, rng);
    trunk_.Emplace<nn::Relu>();
    in_ch = s.filters;
  }
  trunk_.Emplace<nn::GlobalAvgPool>();
  trunk_.Emplace<nn::Linear>(in_ch, cfg_.embed_dim, rng);
  class_head_.Emplace<nn::Linear>(cfg_.embed_dim, cfg_.num_classes, rng);
  transform_head_ = BuildTransformHead(cfg_, rng);
}

Tensor BaseExtractor::ExtractBatch(const Tensor& images) const {
  Check(images.ndim() == 4, "ExtractBatch expects (N,S,S,C)");
  if (images.dim(1) != cfg_.input_size || images.dim(2) != cfg_.input_size ||
      images.dim(3) != cfg_.channels) {
    throw InvalidArgumentError("extractor input resolution mismatch");
  }
  return trunk_.Apply(images);
}

Tensor BaseExtractor::Extract(const Tensor& image) const {
  Check(image.ndim() == 3, "Extract expects (S,S,C)");
  Tensor batch = image.Reshaped({1, image.dim(0), image.dim(1), image.dim(2)});
  Tensor f = ExtractBatch(batch);
  return f.Reshaped({cfg_.embed_dim});
}

Tensor BaseExtractor::VerificationLogits(const Tensor& features) const {
  return class_head_.Apply(features);
}

Tensor BaseExtractor::FeatureStructureTransform(const Tensor& features) const {
  return transform_head_.Apply(features);
}

std::vector<nn::Parameter*> BaseExtractor::Params() {
  std::vector<nn::Parameter*> out;
  trunk_.CollectParams("trunk", &out);
  class_head_.CollectParams("class_head", &out);
  transform_head_.CollectParams("transform_head", &out);
  return out;
}

Checkpoint BaseExtractor::ToCheckpoint() const {
  auto* self = const_cast<BaseExtractor*>(this);
  return Checkpoint::FromParams("extractor", cfg_.ToJson(), self->Params());
}

std::unique_ptr<BaseExtractor> BaseExtractor::FromCheckpoint(const Checkpoint& ck) {
  Check(ck.stage == "extractor", "checkpoint is not an extractor");
  const ExtractorConfig cfg = ExtractorConfig::FromJson(ck.config_json);
  Rng rng(0);  // weights are overwritten below
  auto model = std::make_unique<BaseExtractor>(cfg, rng);
  ck.ToParams(model->Params());
  return model;
}

Tensor ResizeBatch(const Tensor& images, int target_size) {
  const int n = images.dim(0), h = images.dim(1), w = images.dim(2),
            c = images.dim(3);
  if (h == target_size && w == target_size) return images;
  Tensor out({n, target_size, target_size, c});
  for (int i = 0; i < n; ++i) {
    kernels::ResizeBicubic(
        images.data() + static_cast<size_t>(i) * h * w * c, h, w, c,
        out.data() + static_cast<size_t>(i) * target_size * target_size * c,
        target_size, target_size);
  }
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], 0.0f, 1.0f);
  return out;
}

ExtractorTrainResult TrainExtractor(BaseExtractor* model,
                                    const LoadedFaces& train, uint64_t seed) {
  const ExtractorConfig& cfg = model->config();
  const int n = train.images.dim(0);
  Check(n > 0, "empty training set");
  int max_label = -1;
  for (int l : train.labels) max_label = std::max(max_label, l);
  Check(max_label >= 1, "training needs at least two identities");
  Check(max_label < cfg.num_classes, "label exceeds configured class count");

  // x_s targets: bicubic thumbnails of the network inputs.
  const Tensor inputs = ResizeBatch(train.images, cfg.input_size);
  const Tensor x_s_all = ResizeBatch(train.images, cfg.transform_size);

  auto params = model->Params();
  nn::Adam adam(cfg.learning_rate);
  Rng rng(seed);

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  ExtractorTrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.Shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, n - start);
      Tensor xb({bs, cfg.input_size, cfg.input_size, cfg.channels});
      Tensor xs({bs, cfg.transform_size, cfg.transform_size, 3});
      std::vector<int> labels(static_cast<size_t>(bs));
      for (int i = 0; i < bs; ++i) {
        const int src = order[static_cast<size_t>(start + i)];
        xb.SetSlice(i, inputs.Slice(src));
        xs.SetSlice(i, x_s_all.Slice(src));
        labels[static_cast<size_t>(i)] = train.labels[static_cast<size_t>(src)];
      }

      nn::Adam::ZeroGrads(params);
      Tensor f = model->trunk().ForwardStored(xb);
      Tensor logits = model->class_head().ForwardStored(f);
      Tensor x_trans = model->transform_head().ForwardStored(f);

      Tensor glogits, gxtrans;
      const double loss = MultitaskLoss(logits, labels, x_trans, xs,
                                        cfg.lambda_s, &glogits, &gxtrans);
      epoch_loss += loss;
      ++batches;

      Tensor gf = model->class_head().BackwardStored(glogits);
      const Tensor gf2 = model->transform_head().BackwardStored(gxtrans);
      for (size_t i = 0; i < gf.size(); ++i) gf[i] += gf2[i];
      model->trunk().BackwardStored(gf);

      adam.Step(params);
    }
    result.log.push_back({epoch, epoch_loss / batches, cfg.learning_rate});
  }

  // Final training accuracy of the softmax head.
  const Tensor f = model->ExtractBatch(inputs);
  const Tensor logits = model->VerificationLogits(f);
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    int arg = 0;
    for (int j = 1; j < cfg.num_classes; ++j) {
      if (logits.At(i, j) > logits.At(i, arg)) arg = j;
    }
    if (arg == train.labels[static_cast<size_t>(i)]) ++correct;
  }
  result.final_train_accuracy = static_cast<double>(correct) / n;
  return result;
}

}  // namespace sfc
