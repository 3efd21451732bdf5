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

#ifndef SFC_LOSSES_H_
#define SFC_LOSSES_H_

#include <vector>

#include "sfc/tensor.h"

namespace sfc {

// Softmax floor: the cross-entropy term is undefined at zero probability.
inline constexpr double kSoftmaxEpsilon = 1e-12;

// Multi-task extractor objective: batch-summed cross-entropy over softmax
// logits plus lambda_s * SATD(x_s, x_trans). Loss values accumulate in
// double. Optional outputs receive d/d logits and d/d x_trans.
double MultitaskLoss(const Tensor& logits, const std::vector<int>& labels,
                     const Tensor& x_trans, const Tensor& x_s, double lambda_s,
                     Tensor* grad_logits = nullptr,
                     Tensor* grad_x_trans = nullptr);

// Cross-entropy term alone (same conventions), used for ablation.
double CrossEntropySum(const Tensor& logits, const std::vector<int>& labels,
                       Tensor* grad_logits = nullptr);

struct FeatureCodecLossParts {
  double fidelity = 0.0;  // mean over batch of ||f_raw - f_rec||_2^2
  double rate = 0.0;      // mean over batch of ||c||_1
  double guidance = 0.0;  // SATD(x_s, x_trans)
  double total = 0.0;     // fidelity + lambda1 * rate + lambda2 * guidance
};

// End-to-end feature compression objective. Batch axes: f_* are (N, D),
// c_noisy (N, M), images (N, h, w, 3).
FeatureCodecLossParts FeatureCodecLoss(
    const Tensor& f_raw, const Tensor& f_rec, const Tensor& c_noisy,
    const Tensor& x_s, const Tensor& x_trans, double lambda1, double lambda2,
    Tensor* grad_f_rec = nullptr, Tensor* grad_c = nullptr,
    Tensor* grad_x_trans = nullptr);

// Texture reconstruction objective: sum over pyramid levels of
// SATD(level_l, target_l). Optional per-level gradients w.r.t. the levels.
double GeneratorLoss(const std::vector<Tensor>& levels,
                     const std::vector<Tensor>& targets,
                     std::vector<Tensor>* grad_levels = nullptr);

// Rate-distortion objective of the enhancement codec on one image:
// rate_weight * (-sum log2 likelihoods) / num_pixels + SATD(x_norm,
// x_norm_hat). num_pixels = H * W of x_norm. Likelihoods must be in (0, 1];
// values below kLikelihoodFloor are clamped (and counted).
inline constexpr double kLikelihoodFloor = 1e-9;

double RdLoss(const Tensor& x_norm, const Tensor& x_norm_hat,
              const std::vector<double>& latent_likelihoods,
              double rate_weight, int* floored_count = nullptr);

}  // namespace sfc

#endif  // SFC_LOSSES_H_
